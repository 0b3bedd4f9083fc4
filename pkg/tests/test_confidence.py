import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from smoothcert.confidence import (ProbBound, SamplingRecord, Sidedness, binom_interval,
                                   fallback_decision, merge_records, split_budget)
from smoothcert.errors import InputError


def _brute_lower(n, x, a):
    # largest p with P(X >= x | p) <= a, by bisection on the binomial tail
    if x == 0:
        return 0.0
    lo, hi = 0.0, 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if stats.binom.sf(x - 1, n, mid) <= a:
            lo = mid
        else:
            hi = mid
    return lo


def _brute_upper(n, x, a):
    if x == n:
        return 1.0
    lo, hi = 0.0, 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if stats.binom.cdf(x, n, mid) > a:
            lo = mid
        else:
            hi = mid
    return hi


@pytest.mark.parametrize("n,x", [(10, 0), (10, 3), (10, 10), (100, 57), (1000, 999), (50000, 49000)])
def test_two_sided_vs_bisection(n, x):
    b = binom_interval(SamplingRecord(n, x), 0.01)
    assert b.lo == pytest.approx(_brute_lower(n, x, 0.005), abs=1e-9)
    assert b.hi == pytest.approx(_brute_upper(n, x, 0.005), abs=1e-9)
    assert b.confidence == pytest.approx(0.99)


def test_closed_forms_at_extremes():
    n, a = 1000, 0.001
    assert binom_interval(SamplingRecord(n, n), a, Sidedness.LOWER_ONLY).lo == pytest.approx(a ** (1 / n))
    assert binom_interval(SamplingRecord(n, 0), a).hi == pytest.approx(1 - (a / 2) ** (1 / n))


def test_lower_only_equals_two_sided_at_double_alpha():
    rec = SamplingRecord(400, 310)
    one = binom_interval(rec, 0.002, "lower_only")
    two = binom_interval(rec, 0.004)
    assert one.lo == pytest.approx(two.lo, rel=1e-12)
    assert one.hi == 1.0


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 500), st.data())
def test_monotone_in_successes_and_alpha(n, data):
    x = data.draw(st.integers(0, n - 1))
    b0 = binom_interval(SamplingRecord(n, x), 0.05)
    b1 = binom_interval(SamplingRecord(n, x + 1), 0.05)
    assert b1.lo >= b0.lo and b1.hi >= b0.hi
    wide = binom_interval(SamplingRecord(n, x), 0.001)
    assert wide.lo <= b0.lo and wide.hi >= b0.hi


def test_coverage_monte_carlo():
    rng = np.random.default_rng(11)
    n, p, alpha = 60, 0.83, 0.1
    xs = rng.binomial(n, p, size=4000)
    cover = np.mean([binom_interval(SamplingRecord(n, int(x)), alpha).lo <= p
                     <= binom_interval(SamplingRecord(n, int(x)), alpha).hi for x in xs])
    assert cover >= 1 - alpha - 0.015


def test_budget_and_fallback():
    a, b = split_budget(0.001)
    assert a + b == 0.001 and a == b
    assert fallback_decision(SamplingRecord(10, 10))
    assert not fallback_decision(SamplingRecord(10, 9))
    assert merge_records(SamplingRecord(10, 9), SamplingRecord(5, 5)) == SamplingRecord(15, 14)


def test_validation():
    for bad in [(0, 0), (5, 6), (5, -1), (2.5, 1)]:
        with pytest.raises(InputError):
            SamplingRecord(*bad)
    with pytest.raises(InputError):
        binom_interval(SamplingRecord(5, 2), 1.5)
    with pytest.raises(InputError):
        split_budget(0.0)
    with pytest.raises(InputError):
        ProbBound(0.6, 0.5)
    assert ProbBound.point(0.3) == ProbBound(0.3, 0.3)
    assert math.isclose(ProbBound.point(0.3).confidence, 1.0)

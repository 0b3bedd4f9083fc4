import math

import numpy as np
import pytest

from smoothcert.distributions import SmoothingSpec, ball_mass
from smoothcert.errors import InputError
from smoothcert.synthetic import (BallClassifier, GridPoint, analytic_shifted_prob, ball_for_mass, exact_pa_qa,
                                  mc_sample_classifier, oracle_check_point, oracle_grid, q_spec_for,
                                  sample_record, true_radius)

from conftest import draw, mc_tol

SPEC = SmoothingSpec.gaussian(20, 1.0, 2)


def test_shifted_prob_vs_monte_carlo():
    clf = BallClassifier(5.0, 20)
    e = draw(SPEC, 200_000, np.random.default_rng(3))
    for u in [0.0, 1.0, 2.5]:
        x = e.copy()
        x[:, 0] += u
        ref = np.mean(np.linalg.norm(x, axis=1) <= 5.0)
        assert abs(analytic_shifted_prob(clf, SPEC, u) - ref) < mc_tol(ref, len(e))


def test_shifted_prob_edges():
    assert analytic_shifted_prob(BallClassifier(0.0, 20), SPEC, 1.0) == 0.0
    assert analytic_shifted_prob(BallClassifier(math.inf, 20), SPEC, 1.0) == 1.0
    with pytest.raises(InputError):
        analytic_shifted_prob(BallClassifier(1.0, 21), SPEC, 1.0)
    with pytest.raises(InputError):
        analytic_shifted_prob(BallClassifier(1.0, 20), SPEC.truncate(3.0), 1.0)


def test_true_radius_is_the_half_crossing():
    clf = BallClassifier(ball_for_mass(SPEC, 0.8), 20)
    r = true_radius(clf, SPEC)
    assert analytic_shifted_prob(clf, SPEC, r) > 0.5
    assert analytic_shifted_prob(clf, SPEC, r + 1e-4) <= 0.5
    assert true_radius(BallClassifier(ball_for_mass(SPEC, 0.4), 20), SPEC) == 0.0


def test_exact_probabilities_and_ball_for_mass():
    clf = BallClassifier(ball_for_mass(SPEC, 0.75), 20)
    q = SPEC.truncate(ball_for_mass(SPEC, 0.5))
    pa, qa = exact_pa_qa(clf, SPEC, q)
    assert pa == pytest.approx(0.75)
    assert qa == pytest.approx(ball_mass(q, clf.T_true))
    assert ball_for_mass(SPEC, 1.0) == math.inf
    assert exact_pa_qa(BallClassifier(math.inf, 20), SPEC, q) == (1.0, 1.0)


def test_mc_sampler_deterministic_and_unbiased():
    clf = BallClassifier(ball_for_mass(SPEC, 0.7), 20)
    a = mc_sample_classifier(clf, SPEC, 100_000, 5)
    assert a == mc_sample_classifier(clf, SPEC, 100_000, 5)
    assert abs(a.successes / a.trials - 0.7) < mc_tol(0.7, a.trials)
    assert (clf.predict_norm([clf.T_true - 1e-9, clf.T_true + 1e-9]) == [1, 0]).all()


def test_grid():
    pts = list(oracle_grid())
    assert len(pts) == 27
    assert {p.k for p in pts if p.d == 20} == {2}
    assert {p.k for p in pts if p.d == 784} == {380}
    gp = GridPoint(784, 0.5, 380, 0.9)
    assert ball_mass(gp.p_spec, gp.classifier.T_true) == pytest.approx(0.9)
    assert "d=784" in gp.label


def test_q_spec_for():
    assert q_spec_for(SPEC, "trunc", 0.9, T=3.0).T == 3.0
    assert q_spec_for(SPEC, "var", 0.9).sigma == pytest.approx(0.8)
    with pytest.raises(InputError):
        q_spec_for(SPEC, "other", 0.9)


def test_oracle_point_and_fault_injection():
    gp = GridPoint(20, 1.0, 2, 0.75)
    row = oracle_check_point(gp, "trunc")
    assert row.ok and row.radius_dsrs <= row.radius_true + 1e-4
    bad = oracle_check_point(GridPoint(20, 1.0, 2, 0.75), "trunc", inflate=row.radius_true - row.radius_dsrs + 2e-4)
    assert not bad.sound and not bad.ok


def test_sample_record_split_and_fallback():
    clf = BallClassifier(ball_for_mass(SPEC, 0.9), 20)
    rec = sample_record(clf, SPEC, 100_000, 7)
    assert rec.p_count.trials == 50_000 and rec.q_count.trials == 50_000
    assert rec.T is not None and rec.q_family == "trunc"
    assert rec == sample_record(clf, SPEC, 100_000, 7)
    var = sample_record(clf, SPEC, 1000, 7, family="var")
    assert var.beta == pytest.approx(0.8) and var.T is None
    sure = BallClassifier(math.inf, 20)
    fb = sample_record(sure, SPEC, 1000, 7, fallback=True)
    assert fb.q_count is None and fb.p_count.trials == 1000

import math

import mpmath as mp
import numpy as np
import pytest
from scipy import stats

from smoothcert.distributions import (Family, SmoothingSpec, ball_mass, log_radial_density, nu, sample,
                                      sample_t, sigma_prime)
from smoothcert.errors import InputError


def test_family_selection_and_validation():
    assert SmoothingSpec.gaussian(10, 1.0).family is Family.STANDARD
    assert SmoothingSpec.gaussian(10, 1.0, 2).family is Family.GENERALIZED
    assert SmoothingSpec.gaussian(10, 1.0, 0, 3.0).family is Family.TRUNCATED_STANDARD
    assert SmoothingSpec.gaussian(10, 1.0, 2, 3.0).family is Family.TRUNCATED_GENERALIZED
    for bad in [dict(d=10, sigma=-1.0), dict(d=10, sigma=1.0, k=5), dict(d=0, sigma=1.0),
                dict(d=10, sigma=1.0, T=-2.0), dict(d=10.5, sigma=1.0)]:
        with pytest.raises(InputError):
            SmoothingSpec.gaussian(**bad)
    with pytest.raises(InputError):
        SmoothingSpec(Family.STANDARD, 10, 1.0, k=2)
    with pytest.raises(InputError):
        SmoothingSpec(Family.STANDARD, 10, 1.0, T=1.0)


def test_sigma_prime_keeps_second_moment():
    spec = SmoothingSpec.gaussian(784, 0.5, 380)
    assert sigma_prime(spec) == pytest.approx(0.5 * math.sqrt(784 / 24))
    # E||eps||^2 = 2 sigma'^2 * shape = d sigma^2
    assert 2 * spec.sigma_prime ** 2 * spec.shape == pytest.approx(784 * 0.25)


def test_truncate_roundtrip():
    spec = SmoothingSpec.gaussian(50, 1.0, 10)
    tr = spec.truncate(6.0)
    assert tr.family is Family.TRUNCATED_GENERALIZED and tr.untruncated() == spec
    assert spec.t_cut == math.inf
    assert tr.t_cut == pytest.approx(36 / (2 * spec.sigma_prime ** 2))


def test_ball_mass_standard_is_chi2():
    spec = SmoothingSpec.gaussian(7, 2.0)
    for R in [0.5, 4.0, 9.0]:
        assert ball_mass(spec, R) == pytest.approx(stats.chi2.cdf((R / 2.0) ** 2, 7), rel=1e-12)


def test_ball_mass_truncated_and_nu():
    spec = SmoothingSpec.gaussian(20, 1.0, 2, T=4.0)
    par = spec.untruncated()
    assert nu(spec) == pytest.approx(1 / ball_mass(par, 4.0))
    assert ball_mass(spec, 4.0) == pytest.approx(1.0)
    assert ball_mass(spec, 9.0) == 1.0
    assert ball_mass(spec, 3.0) == pytest.approx(ball_mass(par, 3.0) / ball_mass(par, 4.0))
    with pytest.raises(InputError):
        nu(par)
    with pytest.raises(InputError):
        ball_mass(spec, -1.0)


def test_density_integrates_to_one():
    # integrate density * surface area of the sphere over radius
    spec = SmoothingSpec.gaussian(6, 0.7, 1)
    log_area = math.log(2) + 3 * math.log(math.pi) - math.lgamma(3)

    def f(r):
        return mp.exp(log_radial_density(spec, float(r)).log_magnitude + log_area) * r ** 5

    assert float(mp.quad(f, [0, 2, 10, mp.inf])) == pytest.approx(1.0, rel=1e-9)


def test_density_truncated():
    spec = SmoothingSpec.gaussian(6, 0.7, 1, T=2.0)
    par = spec.untruncated()
    assert log_radial_density(spec, 3.0).is_zero
    assert log_radial_density(spec, 1.0).log_magnitude == pytest.approx(
        log_radial_density(par, 1.0).log_magnitude + math.log(nu(spec)))
    with pytest.raises(InputError):
        log_radial_density(spec, 0.0)


def test_sampling_matches_ball_mass():
    rng = np.random.default_rng(1)
    spec = SmoothingSpec.gaussian(30, 0.5, 5)
    r = spec.sigma_prime * np.sqrt(2 * sample_t(spec, rng, 200000))
    for R in [2.0, 2.7, 3.5]:
        p = ball_mass(spec, R)
        assert abs(np.mean(r <= R) - p) < 4.5 * math.sqrt(p * (1 - p) / r.size)


def test_sampling_truncated_stays_inside():
    rng = np.random.default_rng(2)
    spec = SmoothingSpec.gaussian(30, 0.5, 5, T=2.5)
    r = spec.sigma_prime * np.sqrt(2 * sample_t(spec, rng, 50000))
    assert r.max() <= 2.5 + 1e-12
    p = ball_mass(spec, 2.2)
    assert abs(np.mean(r <= 2.2) - p) < 4.5 * math.sqrt(p * (1 - p) / r.size)


def test_sample_direction_is_unit():
    s = sample(SmoothingSpec.gaussian(12, 1.0), np.random.default_rng(3), with_direction=True)
    assert s.radius > 0
    assert np.linalg.norm(s.direction) == pytest.approx(1.0)

import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from smoothcert.errors import InputError
from smoothcert.numerics import (LogScalar, lambert_w0, lambert_w0_log_ratio, lambert_w0_of_exp,
                                 reg_beta_cdf_sym, reg_gamma_cdf, reg_gamma_cdf_inv, signed_log_sum,
                                 signed_logaddexp, std_normal_quantile)

mp.mp.dps = 40


# ---------------------------------------------------------------- LogScalar

def test_logscalar_roundtrip_and_signs():
    for v in [3.5, -2.0, 1e-300, -7e200]:
        assert LogScalar.from_float(v).to_float() == pytest.approx(v, rel=1e-13)
    z = LogScalar.zero()
    assert z.is_zero and z.to_float() == 0.0
    assert LogScalar.infinity().is_infinite
    assert (-LogScalar.from_float(2.0)).to_float() == -2.0
    assert (LogScalar.from_float(-3.0) * LogScalar.from_float(2.0)).to_float() == pytest.approx(-6.0)
    assert float(LogScalar.from_log(1000.0)) == math.inf


def test_logscalar_rejects_bad_sign():
    with pytest.raises(InputError):
        LogScalar(2, 0.0)


def test_signed_log_sum_exact_cancellation():
    assert signed_log_sum([(1, 5.0), (-1, 5.0)]).is_zero
    s = signed_log_sum([(1, 800.0), (-1, 799.0)])
    assert s.sign == 1
    assert s.log_magnitude == pytest.approx(800 + math.log1p(-math.exp(-1)), abs=1e-12)
    s = signed_log_sum([(1, 1.0), (-1, 2.0)])
    assert s.sign == -1
    assert s.to_float() == pytest.approx(math.e - math.e ** 2)


def test_signed_log_sum_infinities():
    assert signed_log_sum([(1, math.inf), (1, 3.0)]).is_infinite
    assert signed_log_sum([(-1, math.inf), (1, 3.0)]).sign == -1
    assert signed_log_sum([(1, -math.inf)]).is_zero


@given(st.floats(-50, 50), st.floats(-50, 50), st.sampled_from([-1, 1]), st.sampled_from([-1, 1]))
def test_signed_logaddexp_matches_float(l1, l2, s1, s2):
    sign, mag = signed_logaddexp(s1, l1, s2, l2)
    ref = s1 * math.exp(l1) + s2 * math.exp(l2)
    got = float(sign) * math.exp(float(mag)) if float(sign) != 0 else 0.0
    assert got == pytest.approx(ref, rel=1e-9, abs=1e-12 * (math.exp(l1) + math.exp(l2)))


# ------------------------------------------------------- incomplete gamma/beta

@pytest.mark.parametrize("a,x", [(0.5, 0.49), (3.0, 2.0), (12.0, 11.76), (392.0, 400.0), (20000.0, 19900.0)])
def test_reg_gamma_cdf_vs_mpmath(a, x):
    ref = float(mp.gammainc(a, 0, x, regularized=True))
    assert reg_gamma_cdf(a, x) == pytest.approx(ref, rel=1e-12, abs=1e-15)


@pytest.mark.parametrize("a,p", [(0.5, 0.3), (2.0, 0.999), (15.0, 1e-8), (392.0, 0.5), (20000.0, 0.5)])
def test_reg_gamma_cdf_inv_roundtrip(a, p):
    x = float(reg_gamma_cdf_inv(a, p))
    assert float(mp.gammainc(a, 0, x, regularized=True)) == pytest.approx(p, rel=1e-10)


def test_reg_gamma_cdf_inv_edges():
    assert reg_gamma_cdf_inv(3.0, 0.0) == 0.0
    with pytest.raises(InputError):
        reg_gamma_cdf_inv(3.0, 1.0)
    with pytest.raises(InputError):
        reg_gamma_cdf_inv(3.0, 1.5)
    with pytest.raises(InputError):
        reg_gamma_cdf(-1.0, 1.0)


def test_reg_gamma_cdf_vectorized():
    xs = np.array([0.1, 1.0, 10.0])
    out = reg_gamma_cdf(2.0, xs)
    assert out.shape == (3,)
    assert np.all(np.diff(out) > 0)


@pytest.mark.parametrize("a,x", [(0.5, 0.2), (9.5, 0.45), (391.5, 0.52), (12499.5, 0.501), (3.0, 0.9)])
def test_reg_beta_cdf_sym_vs_mpmath(a, x):
    a_m = mp.mpf(a)
    log_b = 2 * mp.loggamma(a_m) - mp.loggamma(2 * a_m)
    dens = lambda t: mp.exp((a_m - 1) * (mp.log(t) + mp.log(1 - t)) - log_b)
    # symmetric about 1/2, so integrate from the midpoint
    ref = float(mp.mpf(0.5) + mp.quad(dens, [0.5, x]))
    assert reg_beta_cdf_sym(a, x) == pytest.approx(ref, rel=1e-10, abs=1e-14)


def test_reg_beta_cdf_sym_clamps_and_symmetry():
    assert reg_beta_cdf_sym(4.0, -3.0) == 0.0
    assert reg_beta_cdf_sym(4.0, 7.0) == 1.0
    assert reg_beta_cdf_sym(4.0, 0.5) == pytest.approx(0.5, abs=1e-15)
    for x in [0.1, 0.3, 0.45]:
        assert reg_beta_cdf_sym(7.5, x) + reg_beta_cdf_sym(7.5, 1 - x) == pytest.approx(1.0, abs=1e-14)


# ------------------------------------------------------------------ Lambert W

@pytest.mark.parametrize("x", [1e-12, 0.3, 1.0, 10.0, 1e5, 1e200])
def test_lambert_w0_vs_mpmath(x):
    assert lambert_w0(x) == pytest.approx(float(mp.lambertw(x)), rel=1e-14)


def test_lambert_w0_branch_point_and_domain():
    assert lambert_w0(-1 / math.e) == pytest.approx(-1.0, abs=1e-7)
    for x in [-1 / math.e + 1e-12, -1 / math.e + 5e-7, -1 / math.e + 2e-6]:
        assert lambert_w0(x) == pytest.approx(float(mp.lambertw(x)), abs=1e-12)
    assert lambert_w0(0.0) == 0.0
    with pytest.raises(InputError):
        lambert_w0(-1.0)


@pytest.mark.parametrize("L", [-30.0, 0.0, 1.5, 50.0, 700.0, 1e5])
def test_lambert_w0_of_exp_vs_mpmath(L):
    ref = float(mp.lambertw(mp.exp(L)))
    assert lambert_w0_of_exp(L) == pytest.approx(ref, rel=1e-14)


def test_lambert_w0_of_exp_large():
    # W(e^700) solves w + ln w = 700
    w = lambert_w0_of_exp(700.0)
    assert w == pytest.approx(693.4583, abs=1e-4)
    assert w + math.log(w) == pytest.approx(700.0, rel=1e-15)


@pytest.mark.parametrize("z,c", [(0.01, 0.3), (1.0, -2.0), (3.0, 5.0), (0.5, -40.0), (100.0, 1e-3), (1e-4, 1e-6)])
def test_lambert_w0_log_ratio_vs_mpmath(z, c):
    z_m, c_m = mp.mpf(z), mp.mpf(c)
    ref = float(mp.log(mp.lambertw(z_m * mp.exp(z_m - c_m)) / z_m))
    assert lambert_w0_log_ratio(z, c) == pytest.approx(ref, rel=1e-12, abs=1e-15)


def test_lambert_w0_log_ratio_infinite_c():
    assert lambert_w0_log_ratio(1.0, math.inf) == -math.inf
    assert lambert_w0_log_ratio(1.0, -math.inf) == math.inf


@settings(max_examples=60)
@given(st.floats(1e-3, 1e3), st.floats(-200, 200))
def test_lambert_w0_log_ratio_solves_its_equation(z, c):
    s = lambert_w0_log_ratio(z, c)
    resid = z * math.expm1(s) + s + c
    assert abs(resid) <= 1e-10 * max(1.0, abs(c), z * math.exp(min(s, 50)))


# --------------------------------------------------------------- quantiles

@pytest.mark.parametrize("p", [1e-10, 0.025, 0.5, 0.841344746, 0.999999])
def test_std_normal_quantile_vs_mpmath(p):
    ref = float(mp.sqrt(2) * mp.erfinv(2 * mp.mpf(p) - 1))
    assert std_normal_quantile(p) == pytest.approx(ref, rel=1e-12, abs=1e-14)


def test_std_normal_quantile_domain():
    with pytest.raises(InputError):
        std_normal_quantile(1.2)


def test_lambert_w0_inverse_property_over_range():
    xs = np.concatenate([-1 / math.e + np.logspace(-9, -0.5, 40), np.logspace(-12, 15, 60)])
    w = lambert_w0(xs)
    assert np.all(np.abs(w * np.exp(w) - xs) <= 1e-11 * np.abs(xs))


@pytest.mark.parametrize("L", [-5.0, 0.5, 10.0, 300.0, 700.0])
def test_lambert_w0_of_exp_agrees_with_direct(L):
    assert lambert_w0_of_exp(L) == pytest.approx(lambert_w0(math.exp(L)), rel=1e-12)


def test_lambert_w0_log_ratio_infinite_z():
    assert lambert_w0_log_ratio(math.inf, 0.3) == 0.0
    assert lambert_w0_log_ratio(1e300, 0.3) == pytest.approx(-0.3e-300, rel=1e-6)

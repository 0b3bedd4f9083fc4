"""Special functions and log-domain arithmetic.

The incomplete gamma/beta functions and the normal quantile are thin, validated
wrappers over ``scipy.special``; the Lambert W helpers and the signed log-sum
are implemented here because the integrands need forms scipy does not offer
(W of an exponentiated argument, and a cancellation-free level shift).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import special

from .errors import InputError

__all__ = [
    "LogScalar",
    "reg_gamma_cdf",
    "reg_gamma_cdf_inv",
    "reg_beta_cdf_sym",
    "lambert_w0",
    "lambert_w0_of_exp",
    "lambert_w0_log_ratio",
    "signed_log_sum",
    "signed_logaddexp",
    "std_normal_quantile",
]

_INV_E = math.exp(-1.0)
_INV_E_LO = -1.2428753672788363168e-17  # 1/e - _INV_E


@dataclass(frozen=True)
class LogScalar:
    """A real number stored as ``sign * exp(log_magnitude)``."""

    sign: int
    log_magnitude: float

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise InputError(f"sign must be -1, 0 or 1, got {self.sign}")
        if math.isnan(self.log_magnitude):
            raise InputError("log_magnitude is NaN")
        if (self.sign == 0) != (self.log_magnitude == -math.inf):
            raise InputError("zero sign must pair with log_magnitude = -inf")

    @classmethod
    def zero(cls) -> "LogScalar":
        return cls(0, -math.inf)

    @classmethod
    def infinity(cls) -> "LogScalar":
        return cls(1, math.inf)

    @classmethod
    def from_log(cls, log_value: float) -> "LogScalar":
        """Positive number ``exp(log_value)``; ``-inf`` maps to zero."""
        if log_value == -math.inf:
            return cls.zero()
        return cls(1, float(log_value))

    @classmethod
    def from_float(cls, value: float) -> "LogScalar":
        value = float(value)
        if math.isnan(value):
            raise InputError("cannot encode NaN")
        if value == 0.0:
            return cls.zero()
        return cls(1 if value > 0 else -1, math.log(abs(value)))

    def to_float(self) -> float:
        if self.sign == 0:
            return 0.0
        if self.log_magnitude > 709.78:
            return self.sign * math.inf
        return self.sign * math.exp(self.log_magnitude)

    @property
    def is_zero(self) -> bool:
        return self.sign == 0

    @property
    def is_infinite(self) -> bool:
        return self.log_magnitude == math.inf

    def __neg__(self) -> "LogScalar":
        return LogScalar(-self.sign, self.log_magnitude)

    def __mul__(self, other: "LogScalar") -> "LogScalar":
        if self.sign == 0 or other.sign == 0:
            return LogScalar.zero()
        return LogScalar(self.sign * other.sign, self.log_magnitude + other.log_magnitude)

    def __float__(self) -> float:
        return self.to_float()


def _check_shape(a):
    a = np.asarray(a, dtype=float)
    if np.any(~(a > 0)):
        raise InputError("shape parameter must be positive")
    return a


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def reg_gamma_cdf(a, x):
    """Regularized lower incomplete gamma function P(a, x)."""
    a = _check_shape(a)
    x = np.asarray(x, dtype=float)
    if np.any(~(x >= 0)):
        raise InputError("x must be nonnegative")
    return _out(special.gammainc(a, x))


def reg_gamma_cdf_inv(a, p):
    """Inverse of :func:`reg_gamma_cdf` in its second argument.

    scipy's inverse is followed by one Newton step on the CDF, which brings the
    residual down to the accuracy of ``gammainc`` itself for large shapes.
    """
    a = _check_shape(a)
    p = np.asarray(p, dtype=float)
    if np.any(~((p >= 0) & (p < 1))):
        raise InputError("p must lie in [0, 1)")
    scalar = a.ndim == 0 and p.ndim == 0
    a, p = (np.atleast_1d(v) for v in np.broadcast_arrays(a, p))
    x = special.gammaincinv(a, p)
    ok = (x > 0) & np.isfinite(x)
    if np.any(ok):
        xa, aa, pa = x[ok], a[ok], p[ok]
        log_pdf = (aa - 1.0) * np.log(xa) - xa - special.gammaln(aa)
        pdf = np.exp(log_pdf)
        step = np.where(pdf > 0, (special.gammainc(aa, xa) - pa) / np.where(pdf > 0, pdf, 1.0), 0.0)
        # keep the step only when it is a genuine refinement
        cand = np.maximum(xa - step, 0.5 * xa)
        better = np.abs(special.gammainc(aa, cand) - pa) <= np.abs(special.gammainc(aa, xa) - pa)
        x = x.copy()
        x[ok] = np.where(better, cand, xa)
    return float(x[0]) if scalar else x


def reg_beta_cdf_sym(a, x):
    """Regularized incomplete beta ``I_x(a, a)``, with ``x`` clamped to [0, 1].

    Evaluated on the lower half and reflected, so that the symmetry
    ``F(x) + F(1 - x) = 1`` holds to rounding.
    """
    a = _check_shape(a)
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    upper = x > 0.5
    lo = np.where(upper, 1.0 - x, x)
    v = special.betainc(a, a, lo)
    return _out(np.where(upper, 1.0 - v, v))


def lambert_w0(x):
    """Principal branch of the Lambert W function on ``[-1/e, inf)``."""
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(np.isnan(x)) or np.any(x < -_INV_E * (1 + 4e-16)):
        raise InputError("lambert_w0 requires x >= -1/e")
    x = np.maximum(x, -_INV_E)
    w = special.lambertw(x, 0).real
    # scipy returns NaN at (and rounding-close to) the branch point
    near = x < -_INV_E + 1e-6
    if np.any(near):
        q = np.sqrt(np.maximum(2.0 * math.e * ((x[near] + _INV_E) + _INV_E_LO), 0.0))
        w[near] = -1.0 + q * (1.0 + q * (-1.0 / 3.0 + q * (11.0 / 72.0 + q * (-43.0 / 540.0))))
    # one Halley step away from the branch point tightens the relative error
    far = (x > -_INV_E + 1e-6) & np.isfinite(x) & (x != 0)
    if np.any(far):
        wf, xf = w[far], x[far]
        ew = np.exp(wf)
        f = wf * ew - xf
        wp1 = wf + 1.0
        w[far] = wf - f / (ew * wp1 - (wf + 2.0) * f / (2.0 * wp1))
    return float(w[0]) if scalar else w


def lambert_w0_of_exp(logx):
    """``W(exp(logx))`` without forming ``exp(logx)``.

    For ``logx >= 2`` this solves ``w + ln w = logx`` by Newton's method.
    """
    L = np.asarray(logx, dtype=float)
    if np.any(np.isnan(L)):
        raise InputError("logx is NaN")
    w = np.zeros_like(L)
    small = L < 2.0
    if np.any(small):
        w[small] = special.lambertw(np.exp(L[small]), 0).real
    big = ~small
    if np.any(big):
        Lb = L[big]
        fin = np.isfinite(Lb)
        wb = np.where(fin, Lb - np.log(np.where(fin, Lb, 1.0)), np.inf)
        Lf = Lb[fin]
        wf = np.maximum(wb[fin], 1.0)
        for _ in range(60):
            step = (wf + np.log(wf) - Lf) * wf / (wf + 1.0)
            wf = wf - step
            if np.all(np.abs(step) <= 1e-16 * wf):
                break
        wb[fin] = wf
        w[big] = wb
    return _out(w)


def lambert_w0_log_ratio(z, c):
    """Return ``s = ln(W(z * exp(z - c)) / z)`` for ``z > 0``.

    Equivalently the root of ``z * expm1(s) + s + c = 0``. Computing the ratio
    directly keeps ``t - k W(...)`` accurate when both terms are large and
    nearly equal. ``c = +inf`` gives ``-inf``, ``c = -inf`` gives ``+inf`` and
    ``z = inf`` with finite ``c`` gives ``0``.
    """
    scalar = np.ndim(z) == 0 and np.ndim(c) == 0
    z, c = (np.atleast_1d(v) for v in np.broadcast_arrays(np.asarray(z, dtype=float), np.asarray(c, dtype=float)))
    out = np.empty(z.shape)
    pos_inf = c == np.inf
    neg_inf = c == -np.inf
    out[pos_inf] = -np.inf
    out[neg_inf] = np.inf
    big_z = (z == np.inf) & ~(pos_inf | neg_inf)
    out[big_z] = 0.0
    m = ~(pos_inf | neg_inf | big_z)
    if np.any(m):
        zz, cc = z[m], c[m]
        # starts to the right of the root; Newton on a convex increasing
        # function then decreases monotonically onto it
        s = -cc / (1.0 + zz)
        neg = cc < 0
        if np.any(neg):
            alt = np.log1p(-cc[neg] / zz[neg])
            s[neg] = np.minimum(s[neg], alt)
        for _ in range(200):
            es = np.exp(s)
            g = zz * np.expm1(s) + s + cc
            step = g / (zz * es + 1.0)
            s = s - step
            if np.all(np.abs(step) <= 4e-16 * np.maximum(np.abs(s), 1.0)):
                break
        out[m] = s
    return float(out[0]) if scalar else out


def signed_log_sum(terms: Iterable[Sequence[float]]) -> LogScalar:
    """Encode ``sum(c * exp(x) for c, x in terms)`` as a :class:`LogScalar`."""
    terms = [(float(c), float(x)) for c, x in terms]
    live = [(c, x) for c, x in terms if c != 0.0 and x != -math.inf]
    if not live:
        return LogScalar.zero()
    if any(math.isnan(c) or math.isinf(c) or math.isnan(x) for c, x in live):
        raise InputError("coefficients must be finite and logs not NaN")
    top = max(x for _, x in live)
    if top == math.inf:
        signs = {math.copysign(1, c) for c, x in live if x == math.inf}
        if len(signs) > 1:
            raise InputError("indeterminate inf - inf")
        return LogScalar(int(signs.pop()), math.inf)
    s = math.fsum(c * math.exp(x - top) for c, x in live)
    if s == 0.0:
        return LogScalar.zero()
    return LogScalar(1 if s > 0 else -1, top + math.log(abs(s)))


def signed_logaddexp(s1, l1, s2, l2):
    """Vectorized ``s1*e^l1 + s2*e^l2`` returned as ``(sign, log|.|)`` arrays."""
    s1, l1, s2, l2 = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (s1, l1, s2, l2)))
    l1 = np.where(s1 == 0, -np.inf, l1)
    l2 = np.where(s2 == 0, -np.inf, l2)
    top = np.maximum(l1, l2)
    finite = np.isfinite(top)
    safe_top = np.where(finite, top, 0.0)
    with np.errstate(invalid="ignore", over="ignore"):
        acc = s1 * np.exp(l1 - safe_top) + s2 * np.exp(l2 - safe_top)
    sign = np.sign(acc)
    with np.errstate(divide="ignore"):
        logm = safe_top + np.log(np.abs(acc))
    # infinite magnitudes: the larger term decides
    inf_top = top == np.inf
    if np.any(inf_top):
        pick1 = l1 >= l2
        sign = np.where(inf_top, np.where(pick1, s1, s2), sign)
        logm = np.where(inf_top, np.inf, logm)
    none = top == -np.inf
    sign = np.where(none, 0.0, sign)
    logm = np.where(none | (sign == 0), -np.inf, logm)
    return sign, logm


def std_normal_quantile(p):
    """Inverse CDF of the standard normal distribution."""
    p = np.asarray(p, dtype=float)
    if np.any(~((p > 0) & (p < 1))):
        raise InputError("p must lie strictly inside (0, 1)")
    return _out(special.ndtri(p))

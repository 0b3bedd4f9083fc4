"""Probability functionals of the dual variables.

Everything here conditions on the radius ``rho = sigma' * sqrt(2 t)`` of the
noise draw. On that sphere the first coordinate ``x1`` satisfies
``(1 + x1/rho)/2 ~ Beta((d-1)/2, (d-1)/2)``, so each conditional probability
is a symmetric beta CDF, and the unconditional one is its expectation over
``t ~ Gamma(d/2 - k, 1)``.

Density comparisons are reduced to a *level offset*: for a radial variable
``t`` and a log density ratio ``L`` the generalized Gaussian reaches
``exp(L)`` times its density at ``t`` at radial variable ``t - y``, where
``y = level_offset(t, L, k)``.
"""
from __future__ import annotations

import math

import numpy as np

from ..errors import InputError
from ..numerics import LogScalar, lambert_w0_log_ratio, reg_beta_cdf_sym, reg_gamma_cdf, signed_logaddexp
from .context import CertContext, DualPoint

__all__ = [
    "level_offset",
    "u1", "u2", "u3",
    "compute_P", "compute_Q", "compute_R", "h",
    "np_P", "np_Q", "np_R", "shifted_ball_mass",
]


def level_offset(t, log_ratio, k: int):
    """Return ``y`` with ``t'^-k e^-t' = exp(log_ratio) t^-k e^-t`` at ``t' = t - y``."""
    t = np.asarray(t, dtype=float)
    if k == 0:
        return np.broadcast_to(np.asarray(log_ratio, dtype=float), t.shape).copy()
    log_ratio = np.asarray(log_ratio, dtype=float)
    s = lambert_w0_log_ratio(t / k, log_ratio / k)
    with np.errstate(invalid="ignore", over="ignore"):
        y = -t * np.expm1(s)
    # y tends to log_ratio as t grows
    y = np.where(np.isinf(t), log_ratio, y)
    return np.where(s == -np.inf, t, y)


def _rho(t, ctx: CertContext):
    return ctx.sp * np.sqrt(2.0 * t)


def _beta(ctx: CertContext, arg):
    return reg_beta_cdf_sym(ctx.beta_shape, arg)


def _shift_arg(t, y, ctx: CertContext):
    """Argument of the beta CDF for ``Pr[||x - delta|| exceeds the level radius]``."""
    rho = _rho(t, ctx)
    r = ctx.r
    with np.errstate(invalid="ignore"):
        return 0.5 + (r * r + 2.0 * ctx.sp ** 2 * y) / (4.0 * r * rho)


def _ball_arg(t, excess, ctx: CertContext):
    """Argument for ``Pr[||x + delta||^2 < rho^2 + excess]``."""
    rho = _rho(t, ctx)
    r = ctx.r
    with np.errstate(invalid="ignore"):
        return 0.5 + (excess - r * r) / (4.0 * r * rho)


def _u3(t, log_lam: float, ctx: CertContext):
    y = level_offset(t, log_lam, ctx.k)
    arg = _shift_arg(t, y, ctx)
    return _beta(ctx, np.nan_to_num(arg, nan=0.0, posinf=1.0, neginf=0.0))


def _cap_T(t, ctx: CertContext):
    T = ctx.q_spec.T
    rho = _rho(t, ctx)
    return _beta(ctx, _ball_arg(t, T * T - rho * rho, ctx))


def _u1(t, log_a: float, ctx: CertContext):
    T = ctx.q_spec.T
    rho = _rho(t, ctx)
    y = level_offset(t, -log_a, ctx.k)
    excess = np.minimum(T * T - rho * rho, -2.0 * ctx.sp ** 2 * y)
    arg = _ball_arg(t, excess, ctx)
    return _beta(ctx, np.nan_to_num(arg, nan=0.0, posinf=1.0, neginf=0.0))


def _u2(t, log_l1: float, ctx: CertContext):
    y = level_offset(t, -log_l1, ctx.k)
    arg = _ball_arg(t, -2.0 * ctx.sp ** 2 * y, ctx)
    inner = _beta(ctx, np.nan_to_num(arg, nan=0.0, posinf=1.0, neginf=0.0))
    return np.maximum(inner - _cap_T(t, ctx), 0.0)


def _check_t(t):
    t = np.asarray(t, dtype=float)
    if np.any(~(t > 0)):
        raise InputError("t must be positive")
    return t


def _check_r(ctx: CertContext):
    if not ctx.r > 0:
        raise InputError("the integrands need a positive radius")


def _out(v):
    return float(v) if np.ndim(v) == 0 else v


def u3(t, lam: LogScalar, ctx: CertContext):
    """``Pr[p(x - delta) < lam * p(x)]`` for ``x`` uniform on the sphere of radial variable ``t``."""
    _check_r(ctx)
    t = _check_t(t)
    if lam.sign < 0:
        raise InputError("u3 needs lam >= 0")
    if lam.is_zero:
        return _out(np.zeros_like(t))
    return _out(_u3(t, lam.log_magnitude, ctx))


def u1(t, a: LogScalar, ctx: CertContext):
    """Mass of the shifted acceptance region inside the truncation ball."""
    _check_r(ctx)
    t = _check_t(t)
    if a.sign <= 0:
        return _out(np.zeros_like(t))
    return _out(_u1(t, a.log_magnitude, ctx))


def u2(t, lambda1: LogScalar, ctx: CertContext):
    """Mass of the shifted acceptance region outside the truncation ball."""
    _check_r(ctx)
    t = _check_t(t)
    if lambda1.sign <= 0:
        return _out(np.zeros_like(t))
    return _out(_u2(t, lambda1.log_magnitude, ctx))


# ---------------------------------------------------------------- truncated Q

def _trunc_inside(log_a: float, sign_a: int, ctx: CertContext) -> float:
    """``E[u3(t, a); t <= t*]`` as a fraction of all of P's mass."""
    if sign_a <= 0:
        return 0.0
    if log_a == math.inf:
        return ctx.u_cut
    val, _ = ctx.quad.expect(lambda t: _u3(t, log_a, ctx), 0.0, ctx.u_cut, tol=ctx.delta_int / (2 * ctx.nu))
    return val


def _trunc_outside(lambda1: LogScalar, ctx: CertContext, tol: float) -> float:
    if lambda1.sign <= 0:
        return 0.0
    if lambda1.is_infinite:
        return 1.0 - ctx.u_cut
    val, _ = ctx.quad.expect(lambda t: _u3(t, lambda1.log_magnitude, ctx), ctx.u_cut, 1.0, tol=tol)
    return val


def h(lambda1: LogScalar, ctx: CertContext) -> float:
    """``P - Q/nu``: the part of P's acceptance mass outside the truncation ball."""
    _check_r(ctx)
    if ctx.q_kind != "trunc":
        raise InputError("h is defined for a truncated Q")
    # same tolerance (hence the same nodes) as the outside part of compute_P,
    # so h agrees exactly with P - Q/nu computed there
    return _trunc_outside(lambda1, ctx, ctx.delta_int / 2)


def _trunc_R(dual: DualPoint, ctx: CertContext) -> float:
    a, l1 = dual.a, dual.lambda1
    use_u1 = a.sign > 0
    use_u2 = l1.sign > 0
    if not (use_u1 or use_u2):
        return 0.0

    def fn(t):
        out = np.zeros_like(t)
        if use_u1:
            out = out + (_cap_T(t, ctx) if a.is_infinite else _u1(t, a.log_magnitude, ctx))
        if use_u2:
            out = out + (1.0 - _cap_T(t, ctx) if l1.is_infinite else _u2(t, l1.log_magnitude, ctx))
        return out

    val, _ = ctx.quad.expect(fn, 0.0, 1.0)
    return val


# ---------------------------------------------------- different-variance Q

def _var_gamma(ctx: CertContext) -> float:
    return (ctx.p_spec.sigma / ctx.q_spec.sigma) ** 2


def _var_logdiff(s, ctx: CertContext):
    """``ln q - ln p`` at P-radial variable ``s``."""
    g = _var_gamma(ctx)
    return ctx.p_spec.shape * math.log(g) + s * (1.0 - g)


def _var_accept(s, dual: DualPoint, ctx: CertContext):
    """``Pr[p(x - delta) < l1 p(x) + l2 q(x)]`` on the sphere of P-radial variable ``s``."""
    l1, l2 = dual.lambda1, dual.lambda2
    sign, logc = signed_logaddexp(l1.sign, l1.log_magnitude, l2.sign, l2.log_magnitude + _var_logdiff(s, ctx))
    out = np.zeros_like(s)
    pos = sign > 0
    if np.any(pos):
        out[pos] = _u3_at(s[pos], logc[pos], ctx)
    return out


def _u3_at(t, log_lam, ctx: CertContext):
    y = level_offset(t, log_lam, ctx.k)
    arg = _shift_arg(t, y, ctx)
    return _beta(ctx, np.nan_to_num(arg, nan=0.0, posinf=1.0, neginf=0.0))


def shifted_ball_mass(T: float, ctx: CertContext) -> float:
    """``Pr_{eps~P}[||eps + delta|| <= T]`` for ``||delta|| = ctx.r``."""
    if T <= 0:
        return 0.0
    if ctx.r == 0:
        return _region_mass(ctx.p_spec, ("ball", T))

    def fn(t):
        rho = _rho(t, ctx)
        return _beta(ctx, _ball_arg(t, T * T - rho * rho, ctx))

    val, _ = ctx.quad.expect(fn)
    return val


def _region_mass(spec, region) -> float:
    from ..distributions import ball_mass
    kind, T = region
    m = ball_mass(spec, T)
    return m if kind == "ball" else 1.0 - m


def _var_P(dual: DualPoint, ctx: CertContext) -> float:
    if dual.region is not None:
        return _region_mass(ctx.p_spec, dual.region)
    val, _ = ctx.quad.expect(lambda t: _var_accept(t, dual, ctx).reshape(t.shape),
                             breaks=_var_breaks(dual, ctx, 1.0))
    return val


def _var_Q(dual: DualPoint, ctx: CertContext) -> float:
    if dual.region is not None:
        return _region_mass(ctx.q_spec, dual.region)
    g = _var_gamma(ctx)
    val, _ = ctx.quad.expect(lambda tq: _var_accept(tq / g, dual, ctx).reshape(tq.shape),
                             breaks=_var_breaks(dual, ctx, g))
    return val


_W_MIN, _W_MAX = -80.0, 30.0


def _var_domain(dual: DualPoint, ctx: CertContext):
    """Interval of ``ln s`` on which ``l1 + l2 exp(D(s))`` is positive, or None."""
    l1, l2 = dual.lambda1, dual.lambda2
    if l1.sign <= 0 and l2.sign <= 0:
        return None
    if l1.sign >= 0 and l2.sign >= 0:
        return _W_MIN, _W_MAX
    g = _var_gamma(ctx)
    slope = 1.0 - g
    c0 = ctx.p_spec.shape * math.log(g)
    # boundary where |l2| e^{D(s)} = |l1|
    s_b = (l1.log_magnitude - l2.log_magnitude - c0) / slope
    lo, hi = _W_MIN, _W_MAX
    want_small_D = l1.sign > 0  # need e^D below the ratio
    below = (slope > 0) == want_small_D  # positivity region is s < s_b
    if below:
        if s_b <= 0:
            return None
        hi = min(hi, math.log(s_b))
    elif s_b > 0:
        lo = max(lo, math.log(s_b))
    if lo >= hi:
        return None
    return lo, hi


def _var_breaks(dual: DualPoint, ctx: CertContext, scale: float):
    """Quadrature breaks where ``l1 + l2 exp(D(s))`` changes sign, with ``t = scale * s``."""
    dom = _var_domain(dual, ctx)
    if dom is None:
        return ()
    ends = [w for w in dom if _W_MIN < w < _W_MAX]
    return tuple(float(reg_gamma_cdf(ctx.p_spec.shape, scale * math.exp(w))) for w in ends)


def _var_psi(w, dual: DualPoint, ctx: CertContext):
    s = np.exp(w)
    l1, l2 = dual.lambda1, dual.lambda2
    sign, logc = signed_logaddexp(l1.sign, l1.log_magnitude, l2.sign, l2.log_magnitude + _var_logdiff(s, ctx))
    val = -ctx.k * w - s + logc
    return np.where(sign > 0, val, -np.inf)


def _var_mode(dual: DualPoint, ctx: CertContext, lo: float, hi: float) -> float:
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc = float(_var_psi(np.array(c), dual, ctx))
    fd = float(_var_psi(np.array(d), dual, ctx))
    for _ in range(200):
        if b - a < 1e-13 * max(1.0, abs(a)):
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = float(_var_psi(np.array(c), dual, ctx))
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = float(_var_psi(np.array(d), dual, ctx))
    return 0.5 * (a + b)


def _var_crossing(level, w_from, w_to, dual, ctx, iters=64):
    """Bisection for ``psi(w) = level`` where ``psi(w_from) > level >= psi(w_to)``."""
    a = np.full(level.shape, w_from)
    b = np.full(level.shape, w_to)
    for _ in range(iters):
        m = 0.5 * (a + b)
        above = _var_psi(m, dual, ctx) > level
        a = np.where(above, m, a)
        b = np.where(above, b, m)
    return 0.5 * (a + b)


def _var_R(dual: DualPoint, ctx: CertContext) -> float:
    if dual.region is not None:
        kind, T = dual.region
        v = shifted_ball_mass(T, ctx)
        return v if kind == "ball" else 1.0 - v
    dom = _var_domain(dual, ctx)
    if dom is None:
        return 0.0
    w_lo, w_hi = dom
    w_m = _var_mode(dual, ctx, w_lo, w_hi)
    psi_m = float(_var_psi(np.array(w_m), dual, ctx))
    psi_lo = float(_var_psi(np.array(w_lo), dual, ctx)) if w_lo == _W_MIN else -math.inf
    psi_hi = float(_var_psi(np.array(w_hi), dual, ctx)) if w_hi == _W_MAX else -math.inf
    k = ctx.k
    sp2 = ctx.sp ** 2

    def fn(t):
        shape = t.shape
        t = t.ravel()
        level = -k * np.log(t) - t
        out = np.zeros_like(t)
        live = psi_m > level
        if not np.any(live):
            return out.reshape(shape)
        tl, lv = t[live], level[live]
        # upper crossing
        s_hi = np.full(tl.shape, np.inf)
        need = psi_hi <= lv
        if np.any(need):
            s_hi[need] = np.exp(_var_crossing(lv[need], w_m, w_hi, dual, ctx))
        # lower crossing
        s_lo = np.zeros(tl.shape)
        need = psi_lo <= lv
        if np.any(need):
            s_lo[need] = np.exp(_var_crossing(lv[need], w_m, w_lo, dual, ctx))
        with np.errstate(invalid="ignore", over="ignore"):
            hi_arg = _ball_arg(tl, 2.0 * sp2 * (s_hi - tl), ctx)
            lo_arg = _ball_arg(tl, 2.0 * sp2 * (s_lo - tl), ctx)
        hi_p = np.where(np.isinf(s_hi), 1.0, _beta(ctx, np.nan_to_num(hi_arg, nan=1.0)))
        lo_p = _beta(ctx, np.nan_to_num(lo_arg, nan=0.0))
        out[live] = np.maximum(hi_p - lo_p, 0.0)
        return out.reshape(shape)

    val, _ = ctx.quad.expect(fn)
    return val


# ------------------------------------------------------------- dispatchers

def _need_q(ctx: CertContext):
    if ctx.q_kind == "none":
        raise InputError("this functional needs a Q distribution")


def compute_P(dual: DualPoint, ctx: CertContext) -> float:
    """``Pr_{eps~P}[p(eps - delta) < l1 p(eps) + l2 q(eps)]``."""
    _check_r(ctx)
    _need_q(ctx)
    if ctx.q_kind == "trunc":
        inside = _trunc_inside(dual.a.log_magnitude, dual.a.sign, ctx) if dual.a.sign > 0 else 0.0
        return inside + _trunc_outside(dual.lambda1, ctx, ctx.delta_int / 2)
    return _var_P(dual, ctx)


def compute_Q(dual: DualPoint, ctx: CertContext) -> float:
    """``Pr_{eps~Q}[p(eps - delta) < l1 p(eps) + l2 q(eps)]``."""
    _check_r(ctx)
    _need_q(ctx)
    if ctx.q_kind == "trunc":
        return min(1.0, ctx.nu * _trunc_inside(dual.a.log_magnitude, dual.a.sign, ctx))
    return _var_Q(dual, ctx)


def compute_R(dual: DualPoint, ctx: CertContext) -> float:
    """``Pr_{eps~P}[p(eps) < l1 p(eps + delta) + l2 q(eps + delta)]``."""
    _check_r(ctx)
    _need_q(ctx)
    if ctx.q_kind == "trunc":
        return _trunc_R(dual, ctx)
    return _var_R(dual, ctx)


# ------------------------------------------------- single-constraint (NP)

def np_P(log_lam: float, ctx: CertContext) -> float:
    """``P(lam, 0)``, the acceptance mass of the likelihood-ratio test alone."""
    _check_r(ctx)
    if log_lam == -math.inf:
        return 0.0
    if log_lam == math.inf:
        return 1.0
    val, _ = ctx.quad.expect(lambda t: _u3(t, log_lam, ctx))
    return val


def np_Q(log_lam: float, ctx: CertContext) -> float:
    """``Q(lam, 0)``."""
    _need_q(ctx)
    if ctx.q_kind == "trunc":
        return compute_Q(DualPoint.from_logs(log_lam, -math.inf, ctx.nu), ctx)
    return compute_Q(DualPoint.from_logs(log_lam, -math.inf), ctx)


def np_R(log_lam: float, ctx: CertContext) -> float:
    """``R(lam, 0)``: shifted mass of the likelihood-ratio acceptance set."""
    _check_r(ctx)
    if log_lam == -math.inf:
        return 0.0
    if log_lam == math.inf:
        return 1.0

    def fn(t):
        y = level_offset(t, -log_lam, ctx.k)
        arg = _ball_arg(t, -2.0 * ctx.sp ** 2 * y, ctx)
        return _beta(ctx, np.nan_to_num(arg, nan=0.0, posinf=1.0, neginf=0.0))

    val, _ = ctx.quad.expect(fn)
    return val

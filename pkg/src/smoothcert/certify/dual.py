"""Dual-variable solvers.

All solvers return brackets whose endpoints are verified against the
quadrature error band, and assemble dual points from the endpoints that make
the subsequent shifted probability an under-estimate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from ..errors import AbstainError, InfeasibleError, InputError
from ..numerics import LogScalar, signed_log_sum
from . import integrals as I
from .context import BOUNDARY_TOL, CertContext, DualPoint
from .search import AMBIGUOUS, LOWER, UPPER, Bracket, sound_bracket

__all__ = [
    "solve_np_lambda",
    "solve_q_only",
    "dual_solve_truncated",
    "dual_solve_var",
    "feasible_truncated",
    "var_boundary",
]

_LOG_RANGE = 500.0


def _classify_against(fn, target: float, delta: float, exact_ends=True):
    """Probe classifier for ``fn(x) = target`` with ``fn`` increasing.

    At ``x = +-inf`` the value is a limit known exactly, so no band applies.
    """
    def classify(x):
        v = fn(x)
        band = 0.0 if (math.isinf(x) and exact_ends) else delta
        g = v - target
        if g + band <= 0:
            return g, LOWER
        if g - band >= 0:
            return g, UPPER
        return g, AMBIGUOUS
    return classify


def _log_search(fn, target, ctx: CertContext, delta: Optional[float] = None,
                hint: Optional[str] = None) -> Bracket:
    """Bracket the root in ``ln lam``.

    With ``hint`` the search starts next to the previous solution stored under
    that name (the caller's radius changed only a little); the expansion step
    makes a poor start cost a few extra probes, never correctness.
    """
    delta = ctx.delta_int if delta is None else delta
    lo, hi = -_LOG_RANGE, _LOG_RANGE
    prev = ctx.hints.get(hint) if hint else None
    if prev is not None:
        lo, hi = prev - 0.5, prev + 0.5
    br = sound_bracket(_classify_against(fn, target, delta), lo, hi,
                       xtol=ctx.eps_dual, gtol=delta, cap=ctx.expand_cap)
    if hint and math.isfinite(br.lo) and math.isfinite(br.hi):
        ctx.hints[hint] = 0.5 * (br.lo + br.hi)
    return br


def solve_np_lambda(P_A: float, ctx: CertContext) -> Bracket:
    """Bracket ``ln lam`` with ``P(lam, 0) = P_A``."""
    if not 0.0 <= P_A <= 1.0:
        raise InputError("P_A must be a probability")
    if P_A <= BOUNDARY_TOL:
        return Bracket(-math.inf, -math.inf)
    if P_A >= 1.0 - BOUNDARY_TOL:
        return Bracket(math.inf, math.inf)
    return _log_search(lambda x: I.np_P(x, ctx), P_A, ctx, hint="np")


def _mid(br: Bracket) -> float:
    if br.lo == br.hi:
        return br.lo
    if math.isinf(br.lo):
        return br.hi
    if math.isinf(br.hi):
        return br.lo
    return 0.5 * (br.lo + br.hi)


def feasible_truncated(P_A: float, Q_A: float, nu: float, tol: float = BOUNDARY_TOL) -> bool:
    return Q_A / nu <= P_A + tol and P_A <= 1.0 - (1.0 - Q_A) / nu + tol


def _trunc_Q_of_log_a(x: float, ctx: CertContext) -> float:
    if x == -math.inf:
        return 0.0
    if x == math.inf:
        return 1.0
    return I.compute_Q(DualPoint(LogScalar.zero(), LogScalar.zero(), a=LogScalar.from_log(x)), ctx)


def _h_of_log(x: float, ctx: CertContext) -> float:
    if x == -math.inf:
        return 0.0
    if x == math.inf:
        return 1.0 - 1.0 / ctx.nu
    return I.h(LogScalar.from_log(x), ctx)


def dual_solve_truncated(P_A: float, Q_A: float, ctx: CertContext, sound: bool = True) -> DualPoint:
    """Solve both constraints for a truncated Q (two decoupled searches).

    With ``sound=False`` the searches ignore the quadrature error band and
    the point is read from the bracket midpoints:
    the nominal inverse, useful for checking the solver, never for
    certification.
    """
    if ctx.q_kind != "trunc":
        raise InputError("context does not carry a truncated Q")
    nu = ctx.nu
    if not (0.0 <= P_A <= 1.0 and 0.0 <= Q_A <= 1.0):
        raise InputError("P_A and Q_A must be probabilities")
    if not feasible_truncated(P_A, Q_A, nu):
        raise InfeasibleError(f"(P_A={P_A}, Q_A={Q_A}) is outside the feasible region for nu={nu}")
    band = ctx.delta_int if sound else 0.0

    # the Q constraint only sees a = lambda1 + nu * lambda2
    if Q_A >= 1.0 - BOUNDARY_TOL:
        a_br = Bracket(math.inf, math.inf)
    elif Q_A <= BOUNDARY_TOL:
        a_br = Bracket(-math.inf, -math.inf)
    else:
        a_br = _log_search(lambda x: _trunc_Q_of_log_a(x, ctx), Q_A, ctx, delta=band, hint="a")

    target = P_A - Q_A / nu
    upper = 1.0 - 1.0 / nu
    if target <= BOUNDARY_TOL:
        l1_br = Bracket(-math.inf, -math.inf)
    elif target >= upper - BOUNDARY_TOL:
        l1_br = Bracket(math.inf, math.inf)
    else:
        l1_br = _log_search(lambda x: _h_of_log(x, ctx), target, ctx, delta=band, hint="l1")

    if not sound:
        return _nominal_truncated(a_br, l1_br, nu)
    return _assemble_truncated(a_br, l1_br, nu)


def _nominal_truncated(a_br: Bracket, l1_br: Bracket, nu: float) -> DualPoint:
    a, l1 = _mid(a_br), _mid(l1_br)
    lambda1 = LogScalar.from_log(l1)
    a_s = LogScalar.from_log(a)
    if a == math.inf:
        lambda2 = LogScalar.infinity()
    elif l1 == math.inf:
        lambda2 = LogScalar(-1, math.inf)
    else:
        lam2 = signed_log_sum([(1.0, a), (-1.0, l1)])
        lambda2 = lam2 if lam2.is_zero else LogScalar(lam2.sign, lam2.log_magnitude - math.log(nu))
    return DualPoint(lambda1, lambda2, (l1_br.lo, l1_br.hi), (a_br.lo, a_br.hi), a=a_s, nu=nu)


def _assemble_truncated(a_br: Bracket, l1_br: Bracket, nu: float) -> DualPoint:
    l1_lo, l1_hi, a_lo = l1_br.lo, l1_br.hi, a_br.lo
    lambda1 = LogScalar.from_log(l1_lo)
    if l1_lo == l1_hi or a_lo == math.inf:
        a_eff = LogScalar.from_log(a_lo)
    else:
        # lambda1_lo + (a_lo - lambda1_hi): the smallest sum consistent with both brackets
        a_eff = signed_log_sum([(1.0, l1_lo), (1.0, a_lo), (-1.0, l1_hi)])
    if a_lo == math.inf:
        lambda2 = LogScalar.infinity()
    elif l1_hi == math.inf:
        lambda2 = LogScalar(-1, math.inf)
    else:
        lam2 = signed_log_sum([(1.0, a_lo), (-1.0, l1_hi)])
        lambda2 = lam2 if lam2.is_zero else LogScalar(lam2.sign, lam2.log_magnitude - math.log(nu))
    return DualPoint(lambda1, lambda2, (l1_br.lo, l1_br.hi), (a_br.lo, a_br.hi), a=a_eff, nu=nu)


# ----------------------------------------------------------- var family

def _z_to_lambda(z: float) -> LogScalar:
    """``sign(z) * (exp|z| - 1)``: a signed, log-friendly parametrization."""
    if z == 0:
        return LogScalar.zero()
    az = abs(z)
    if math.isinf(az):
        return LogScalar(1 if z > 0 else -1, math.inf)
    mag = az + math.log(-math.expm1(-az)) if az > 1e-300 else math.log(az)
    return LogScalar(1 if z > 0 else -1, mag)


def _var_dual(z1: float, z2: float) -> DualPoint:
    return DualPoint(_z_to_lambda(z1), _z_to_lambda(z2))


def _var_P(z1, z2, ctx):
    if z2 == -math.inf:
        return 0.0
    if z2 == math.inf:
        return 1.0
    return I.compute_P(_var_dual(z1, z2), ctx)


def _var_Q(z1, z2, ctx):
    if z2 == -math.inf:
        return 0.0
    if z2 == math.inf:
        return 1.0
    return I.compute_Q(_var_dual(z1, z2), ctx)


_Z_RANGE = 30.0


@dataclass
class _Inner:
    lo: float
    hi: float


def _inner_solve(z1: float, P_A: float, ctx: CertContext, guess: Optional[float],
                 band: Optional[float] = None) -> _Inner:
    band = ctx.delta_int if band is None else band
    classify = _classify_against(lambda z2: _var_P(z1, z2, ctx), P_A, band)
    if guess is None or math.isinf(guess):
        lo, hi = -_Z_RANGE, _Z_RANGE
    else:
        lo, hi = guess - 1.0, guess + 1.0
    br = sound_bracket(classify, lo, hi, xtol=ctx.eps_dual, gtol=band, cap=ctx.expand_cap)
    return _Inner(br.lo, br.hi)


def solve_q_only(Q_A: float, ctx: CertContext) -> Bracket:
    """Bracket for ``mu`` with ``Q(0, mu) = Q_A`` (log scale for trunc, z scale for var)."""
    if ctx.q_kind == "trunc":
        if Q_A >= 1.0 - BOUNDARY_TOL:
            return Bracket(math.inf, math.inf)
        if Q_A <= BOUNDARY_TOL:
            return Bracket(-math.inf, -math.inf)
        return _log_search(lambda x: _trunc_Q_of_log_a(x, ctx), Q_A, ctx)
    classify = _classify_against(lambda z: _var_Q(0.0, z, ctx), Q_A, ctx.delta_int)
    return sound_bracket(classify, -_Z_RANGE, _Z_RANGE, xtol=ctx.eps_dual, gtol=ctx.delta_int,
                         cap=ctx.expand_cap)


def var_boundary(P_A: float, Q_A: float, ctx: CertContext, tol: float = BOUNDARY_TOL):
    """Detect the edges of the feasible Q_A range for a different-variance Q.

    With ``q/p`` monotone in the radius, the Q-mass at fixed P-mass is extremal
    for a centered ball and for the complement of one. At either extreme the
    classifier is pinned down and the multipliers diverge, so the caller gets
    the region instead. Returns ``("ball"|"shell", radius)`` or None, and
    raises :class:`InfeasibleError` outside the range.
    """
    from ..distributions import ball_mass
    from ..numerics import reg_gamma_cdf_inv
    sp = ctx.p_spec.sigma_prime
    shape = ctx.p_spec.shape
    T_ball = sp * math.sqrt(2.0 * reg_gamma_cdf_inv(shape, P_A))
    T_shell = sp * math.sqrt(2.0 * reg_gamma_cdf_inv(shape, 1.0 - P_A))
    q_ball = ball_mass(ctx.q_spec, T_ball)
    q_shell = 1.0 - ball_mass(ctx.q_spec, T_shell)
    if Q_A < min(q_ball, q_shell) - tol or Q_A > max(q_ball, q_shell) + tol:
        raise InfeasibleError(f"Q_A={Q_A} outside the achievable range for P_A={P_A}")
    if abs(Q_A - q_ball) <= tol:
        return ("ball", T_ball)
    if abs(Q_A - q_shell) <= tol:
        return ("shell", T_shell)
    return None


def dual_solve_var(P_A: float, Q_A: float, ctx: CertContext, sound: bool = True) -> DualPoint:
    """Joint search for a different-variance Q.

    Along the curve ``P(l1, l2) = P_A`` the multiplier ``l2`` decreases as
    ``l1`` grows and ``Q`` decreases; the outer search brackets ``l1`` on that
    curve and the inner one solves for ``l2``.
    """
    if ctx.q_kind != "var":
        raise InputError("context does not carry a different-variance Q")
    if not (0.0 < P_A < 1.0 and 0.0 < Q_A < 1.0):
        raise InputError("the joint search needs P_A and Q_A strictly inside (0, 1)")
    edge = var_boundary(P_A, Q_A, ctx)
    if edge is not None:
        return DualPoint(LogScalar.zero(), LogScalar.zero(), region=edge)
    band = ctx.delta_int if sound else 0.0
    inner_cache: dict[float, _Inner] = {}
    last = [None]

    def classify(z1):
        if math.isinf(z1):
            raise AbstainError("outer search left the representable range")
        inn = _inner_solve(z1, P_A, ctx, last[0], band)
        inner_cache[z1] = inn
        if not math.isinf(inn.lo) and not math.isinf(inn.hi):
            last[0] = 0.5 * (inn.lo + inn.hi)
        if not sound:
            g = Q_A - _var_Q(z1, 0.5 * (inn.lo + inn.hi), ctx)
            return g, (LOWER if g <= 0 else UPPER)
        q_lo = _var_Q(z1, inn.lo, ctx)
        if q_lo - band >= Q_A:
            return Q_A - q_lo, LOWER
        q_hi = _var_Q(z1, inn.hi, ctx)
        if q_hi + band <= Q_A:
            return Q_A - q_hi, UPPER
        return Q_A - 0.5 * (q_lo + q_hi), AMBIGUOUS

    br = sound_bracket(classify, -_Z_RANGE, _Z_RANGE, xtol=ctx.eps_dual, gtol=band,
                       cap=ctx.expand_cap, limit=1e4)
    if math.isinf(br.lo) or math.isinf(br.hi):
        raise AbstainError("joint search did not bracket lambda1")
    if not sound:
        z1 = 0.5 * (br.lo + br.hi)
        inn = _inner_solve(z1, P_A, ctx, last[0], 0.0)
        return DualPoint(_z_to_lambda(z1), _z_to_lambda(0.5 * (inn.lo + inn.hi)), (br.lo, br.hi),
                         (inn.lo, inn.hi))
    z2_lo = inner_cache[br.hi].lo
    dual = DualPoint(_z_to_lambda(br.lo), _z_to_lambda(z2_lo), (br.lo, br.hi), (z2_lo, inner_cache[br.lo].hi))
    return dual

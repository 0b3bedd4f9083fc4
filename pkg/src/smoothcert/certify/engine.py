"""Worst-case probability selection, radius checks and the outer radius search."""
from __future__ import annotations

import math
import time
from typing import Optional

from ..confidence import ProbBound
from ..distributions import SmoothingSpec
from ..errors import AbstainError, InfeasibleError, InputError
from ..numerics import std_normal_quantile
from . import integrals as I
from .context import BOUNDARY_TOL, CertContext, CertOutcome, DualPoint
from .dual import (_mid, _var_P, dual_solve_truncated, dual_solve_var, feasible_truncated,
                   solve_np_lambda, solve_q_only)
from .search import LOWER, UPPER, sound_bracket

__all__ = ["worst_case_pa_qa", "np_radius", "check_radius", "certify", "solve_dual"]


def worst_case_pa_qa(p_box: ProbBound, q_box: ProbBound, ctx: CertContext) -> tuple[float, float]:
    """Pick the point of the confidence box that minimizes the certified value."""
    p_lo, p_hi = p_box.lo, p_box.hi
    q_lo, q_hi = q_box.lo, q_box.hi
    lam = solve_np_lambda(p_lo, ctx)
    q_np = I.np_Q(_mid(lam), ctx)
    if q_np > q_lo:
        return p_lo, min(q_np, q_hi)
    if ctx.q_kind == "trunc":
        p_q = q_lo / ctx.nu
    else:
        mu = solve_q_only(q_lo, ctx)
        p_q = _var_P(0.0, _mid(mu), ctx)
    P_A = max(min(p_q, p_hi), p_lo)
    Q_A = q_lo
    if ctx.q_kind == "trunc" and not feasible_truncated(P_A, Q_A, ctx.nu):
        raise InfeasibleError("confidence box does not meet the feasible region")
    return P_A, Q_A


def solve_dual(P_A: float, Q_A: float, ctx: CertContext) -> DualPoint:
    if ctx.q_kind == "trunc":
        return dual_solve_truncated(P_A, Q_A, ctx)
    return dual_solve_var(P_A, Q_A, ctx)


def _np_margin(P_A: float, ctx: CertContext) -> float:
    lam = solve_np_lambda(P_A, ctx)
    return I.np_R(lam.lo, ctx) - ctx.delta_int - 0.5


def _radius_search(margin, r_max: float, eps: float, P_lo: float, first: Optional[float] = None):
    """Largest verified radius in ``[0, r_max]`` for a decreasing ``margin``.

    ``margin(r)`` returns a float (positive means certified) or raises
    :class:`AbstainError`/:class:`InfeasibleError`, which count as failures.
    """
    stats = {"abstains": 0, "checks": 0, "reasons": []}

    def classify(r):
        if r <= 0:
            return -(P_lo - 0.5), LOWER
        stats["checks"] += 1
        try:
            m = margin(r)
        except (AbstainError, InfeasibleError) as exc:
            stats["abstains"] += 1
            stats["reasons"].append(f"r={r:.6g}: {exc}")
            return None, UPPER
        return -m, (LOWER if m > 0 else UPPER)

    g_top, k_top = classify(r_max)
    if k_top == LOWER:
        return r_max, stats
    br = sound_bracket(classify, 0.0, r_max, xtol=eps, first=first, probed={r_max: (g_top, k_top)})
    return br.lo, stats


def _is_standard(spec: SmoothingSpec) -> bool:
    return spec.k == 0


def np_radius(P_A: float, p_spec: SmoothingSpec, ctx: CertContext, r_max: Optional[float] = None,
              numeric: bool = False) -> float:
    """Single-constraint certified radius at probability ``P_A``."""
    if not 0.0 <= P_A <= 1.0:
        raise InputError("P_A must be a probability")
    if P_A <= 0.5:
        return 0.0
    if _is_standard(p_spec) and not numeric:
        if P_A >= 1.0:
            return math.inf if r_max is None else r_max
        r = p_spec.sigma * std_normal_quantile(P_A)
        return r if r_max is None else min(r, r_max)
    r_max = p_spec.sigma * math.sqrt(p_spec.d) if r_max is None else r_max
    r, _ = _radius_search(lambda r: _np_margin(P_A, ctx.with_radius(r)), r_max, ctx.eps_radius, P_A)
    return r


def _dsrs_margin(r, p_box, q_box, ctx):
    c = ctx.with_radius(r)
    P_A, Q_A = worst_case_pa_qa(p_box, q_box, c)
    dual = solve_dual(P_A, Q_A, c)
    return I.compute_R(dual, c) - c.delta_int - 0.5


def check_radius(r: float, p_box: ProbBound, q_box: ProbBound, ctx: CertContext) -> bool:
    """True iff the dual certificate at radius ``r`` exceeds one half with margin."""
    if not r > 0:
        raise InputError("r must be positive")
    ctx.hints.clear()
    try:
        return _dsrs_margin(r, p_box, q_box, ctx) > 0
    except (AbstainError, InfeasibleError):
        return False


def certify(p_box: ProbBound, q_box: ProbBound, ctx: CertContext, r_max: Optional[float] = None) -> CertOutcome:
    """Certified radii for one input: the likelihood-ratio baseline and the two-distribution one."""
    spec = ctx.p_spec
    r_max = spec.sigma * math.sqrt(spec.d) if r_max is None else float(r_max)
    if not r_max > 0:
        raise InputError("r_max must be positive")
    t0 = time.perf_counter()
    ctx.hints.clear()
    diag = {}
    try:
        r_np = np_radius(p_box.lo, spec, ctx, r_max=r_max)
    except AbstainError as exc:
        return CertOutcome(0.0, 0.0, abstained=True, diagnostics={"error": str(exc)})
    if p_box.lo <= 0.5:
        diag["seconds"] = time.perf_counter() - t0
        return CertOutcome(r_np, 0.0, diagnostics=diag)
    first = r_np if 0 < r_np < r_max else None
    r_dsrs, stats = _radius_search(lambda r: _dsrs_margin(r, p_box, q_box, ctx), r_max,
                                   ctx.eps_radius, p_box.lo, first=first)
    diag.update(stats)
    if stats["abstains"]:
        diag["fallback_np"] = r_np > r_dsrs
        r_dsrs = max(r_dsrs, r_np)
    diag["quad_evaluations"] = ctx.quad.evaluations
    diag["seconds"] = time.perf_counter() - t0
    return CertOutcome(r_np, r_dsrs, diagnostics=diag)

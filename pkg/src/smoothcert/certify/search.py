"""Bracketing search for monotone functions known only up to an error band.

The callers never need the root itself, only a pair ``lo < hi`` with a
certificate that the true root lies between them. Each probe is classified
as a verified lower end, a verified upper end, or ambiguous (inside the
numerical error band). Candidates come from Illinois false position with a
bisection safeguard, which needs far fewer integrals than plain halving.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

from ..errors import AbstainError

LOWER, AMBIGUOUS, UPPER = -1, 0, 1

# (proxy value increasing in x or None, classification)
Probe = Tuple[Optional[float], int]


@dataclass
class Bracket:
    lo: float
    hi: float
    g_lo: Optional[float] = None
    g_hi: Optional[float] = None
    evaluations: int = 0
    notes: list = field(default_factory=list)

    @property
    def width(self) -> float:
        return self.hi - self.lo


def _expand(classify, x, direction, want, step, cap, limit, br):
    """Step outward from ``x`` until ``classify`` reports ``want``."""
    for _ in range(cap):
        x = x + direction * step
        step *= 2.0
        if abs(x) > limit:
            x = direction * math.inf
        g, kind = classify(x)
        br.evaluations += 1
        if kind == want:
            return x, g
        if math.isinf(x):
            break
    raise AbstainError("bracket expansion exhausted")


def sound_bracket(classify: Callable[[float], Probe], lo: float, hi: float, *, xtol: float,
                  gtol: float = 0.0, cap: int = 200, limit: float = 1e6, max_iter: int = 200,
                  first: Optional[float] = None, probed: Optional[dict] = None) -> Bracket:
    """Shrink ``[lo, hi]`` around the root of an increasing function.

    ``probed`` may map already evaluated points to their probes so the
    initial endpoints are not recomputed.
    """
    probed = probed or {}
    br = Bracket(lo, hi)

    def run(x):
        if x in probed:
            return probed[x]
        br.evaluations += 1
        return classify(x)

    width0 = max(hi - lo, 1.0)
    g_lo, k_lo = run(lo)
    g_hi = None
    if k_lo != LOWER:
        if k_lo == UPPER:
            hi, g_hi, k_hi = lo, g_lo, UPPER
        lo, g_lo = _expand(classify, lo, -1.0, LOWER, width0, cap, limit, br)
    if g_hi is None:
        g_hi, k_hi = run(hi)
        if k_hi != UPPER:
            if k_hi == LOWER:
                lo, g_lo = hi, g_hi
            hi, g_hi = _expand(classify, hi, 1.0, UPPER, width0, cap, limit, br)
    if math.isinf(lo) or math.isinf(hi):
        br.lo, br.hi, br.g_lo, br.g_hi = lo, hi, g_lo, g_hi
        br.notes.append("infinite endpoint")
        return br

    side = 0  # +1 when the last two moves kept hi fixed, -1 for lo
    fa, fb = g_lo, g_hi
    for it in range(max_iter):
        w = hi - lo
        if w <= xtol:
            break
        if it == 0 and first is not None and lo < first < hi:
            c = first
        elif fa is not None and fb is not None and fb > fa:
            c = lo - fa * w / (fb - fa)
            margin = 0.02 * w
            if not (lo + margin < c < hi - margin):
                c = min(max(c, lo + margin), hi - margin)
        else:
            c = 0.5 * (lo + hi)
        if it % 4 == 3:
            c = 0.5 * (lo + hi)  # guarantees geometric shrinkage
        g, kind = run(c)
        if kind == LOWER:
            lo, g_lo, fa = c, g, g
            if side == -1 and fb is not None:
                fb *= 0.5
            side = -1
        elif kind == UPPER:
            hi, g_hi, fb = c, g, g
            if side == 1 and fa is not None:
                fa *= 0.5
            side = 1
        else:
            _resolve_band(run, c, g, lo, hi, g_lo, g_hi, xtol, gtol, br)
            return br
        if g is None:
            fa = fb = None
    br.lo, br.hi, br.g_lo, br.g_hi = lo, hi, g_lo, g_hi
    return br


def _resolve_band(run, c, g, lo, hi, g_lo, g_hi, xtol, gtol, br):
    """Find verified endpoints on both sides of an ambiguous probe ``c``."""
    slope = None
    if g_lo is not None and g_hi is not None and hi > lo:
        slope = (g_hi - g_lo) / (hi - lo)
    eta0 = xtol
    if slope and slope > 0 and gtol > 0:
        eta0 = max(xtol, 3.0 * gtol / slope)
    new_lo, new_glo = lo, g_lo
    eta = eta0
    while c - eta > lo:
        gx, kx = run(c - eta)
        if kx == LOWER:
            new_lo, new_glo = c - eta, gx
            break
        eta *= 4.0
    new_hi, new_ghi = hi, g_hi
    eta = eta0
    while c + eta < hi:
        gx, kx = run(c + eta)
        if kx == UPPER:
            new_hi, new_ghi = c + eta, gx
            break
        eta *= 4.0
    br.lo, br.hi, br.g_lo, br.g_hi = new_lo, new_hi, new_glo, new_ghi

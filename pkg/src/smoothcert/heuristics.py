"""Default hyperparameters for the additional smoothing distribution."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .distributions import SmoothingSpec
from .errors import InputError
from .numerics import reg_gamma_cdf_inv

__all__ = ["HeuristicConfig", "heuristic_mass", "t_from_pa", "default_k", "default_beta", "BENCHMARK_K"]

# dimensions of the usual image benchmarks and the k used there
BENCHMARK_K = {784: 380, 3072: 1530, 150528: 75260}


@dataclass(frozen=True)
class HeuristicConfig:
    p_floor: float = 0.5
    p_ceiling: float = 0.999
    slope: float = -0.08
    intercept: float = 0.2

    def __post_init__(self):
        if not 0.0 < self.p_floor <= self.p_ceiling < 1.0:
            raise InputError("need 0 < p_floor <= p_ceiling < 1")


def heuristic_mass(pa_lower: float, cfg: HeuristicConfig = HeuristicConfig()) -> float:
    """Target P-mass of the truncation ball for a given lower bound on P_A."""
    if not 0.0 < pa_lower < 1.0:
        raise InputError("pa_lower must lie in (0, 1)")
    p = cfg.slope * math.log1p(-pa_lower) + cfg.intercept
    return min(max(p, cfg.p_floor), cfg.p_ceiling)


def t_from_pa(pa_lower: float, spec: SmoothingSpec, cfg: HeuristicConfig = HeuristicConfig()) -> float:
    """Truncation radius whose P-mass equals :func:`heuristic_mass`."""
    p = heuristic_mass(pa_lower, cfg)
    t = float(reg_gamma_cdf_inv(spec.shape, p))
    return spec.sigma_prime * math.sqrt(2.0 * t)


def default_k(d: int) -> int:
    if int(d) != d or d < 26:
        raise InputError(f"default k needs an integer d >= 26, got {d}")
    d = int(d)
    return BENCHMARK_K.get(d, d // 2 - 8)


BETA_RATIO = 0.8


def default_beta(sigma: float) -> float:
    """Scale of the different-variance Q when none is given."""
    return BETA_RATIO * sigma

"""Exact binomial confidence bounds and the budget rules around them."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from scipy import stats

from .errors import InputError

__all__ = [
    "Sidedness",
    "SamplingRecord",
    "ProbBound",
    "binom_interval",
    "split_budget",
    "fallback_decision",
    "merge_records",
]


class Sidedness(str, enum.Enum):
    TWO_SIDED = "two_sided"
    LOWER_ONLY = "lower_only"


@dataclass(frozen=True)
class SamplingRecord:
    trials: int
    successes: int

    def __post_init__(self):
        if int(self.trials) != self.trials or self.trials < 1:
            raise InputError(f"trials must be a positive integer, got {self.trials}")
        if int(self.successes) != self.successes or not 0 <= self.successes <= self.trials:
            raise InputError(f"successes must lie in [0, trials], got {self.successes}")
        object.__setattr__(self, "trials", int(self.trials))
        object.__setattr__(self, "successes", int(self.successes))


@dataclass(frozen=True)
class ProbBound:
    lo: float
    hi: float
    confidence: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.lo <= self.hi <= 1.0:
            raise InputError(f"need 0 <= lo <= hi <= 1, got [{self.lo}, {self.hi}]")
        if not 0.0 <= self.confidence <= 1.0:
            raise InputError("confidence must be a probability")

    @classmethod
    def point(cls, p: float) -> "ProbBound":
        return cls(p, p, 1.0)


def _lower(n: int, x: int, a: float) -> float:
    if x == 0:
        return 0.0
    if x == n:
        return a ** (1.0 / n)
    return float(stats.beta.ppf(a, x, n - x + 1))


def _upper(n: int, x: int, a: float) -> float:
    if x == n:
        return 1.0
    if x == 0:
        return 1.0 - a ** (1.0 / n)
    return float(stats.beta.ppf(1.0 - a, x + 1, n - x))


def binom_interval(rec: SamplingRecord, alpha: float, sidedness=Sidedness.TWO_SIDED) -> ProbBound:
    """Clopper-Pearson bounds; ``two_sided`` spends ``alpha/2`` per side."""
    if not 0.0 < alpha < 1.0:
        raise InputError("alpha must lie in (0, 1)")
    sidedness = Sidedness(sidedness)
    n, x = rec.trials, rec.successes
    if sidedness is Sidedness.LOWER_ONLY:
        return ProbBound(_lower(n, x, alpha), 1.0, 1.0 - alpha)
    lo, hi = _lower(n, x, alpha / 2.0), _upper(n, x, alpha / 2.0)
    return ProbBound(lo, max(lo, hi), 1.0 - alpha)


def split_budget(alpha_total: float) -> tuple[float, float]:
    if not 0.0 < alpha_total < 1.0:
        raise InputError("alpha must lie in (0, 1)")
    half = alpha_total / 2.0
    return half, alpha_total - half


def fallback_decision(p_record: SamplingRecord) -> bool:
    """True when every P-sample hit the top class."""
    return p_record.successes == p_record.trials


def merge_records(a: SamplingRecord, b: SamplingRecord) -> SamplingRecord:
    return SamplingRecord(a.trials + b.trials, a.successes + b.successes)

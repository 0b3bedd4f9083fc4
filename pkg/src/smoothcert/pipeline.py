"""Per-record certification: counts in, radii out.

Shared by the command line and the estimator so both produce identical
numbers for the same record.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Optional

from .certify.context import DELTA_INT, EPS_RADIUS, CertContext
from .certify.engine import certify, np_radius
from .confidence import SamplingRecord, Sidedness, binom_interval, fallback_decision, split_budget
from .distributions import SmoothingSpec
from .errors import AbstainError, InfeasibleError, InputError
from .heuristics import HeuristicConfig, default_beta, default_k, t_from_pa

__all__ = ["InputRecord", "RunConfig", "ResultRow", "certify_record", "CSV_FIELDS", "Q_FAMILIES"]

Q_FAMILIES = ("trunc", "var")
CSV_FIELDS = ("id", "p_lo", "p_hi", "q_lo", "q_hi", "T", "radius_np", "radius_dsrs",
              "radius_linf_dsrs", "abstained", "error")


def _count(obj) -> Optional[SamplingRecord]:
    if obj is None:
        return None
    if isinstance(obj, SamplingRecord):
        return obj
    if isinstance(obj, dict):
        return SamplingRecord(obj["trials"], obj["successes"])
    trials, successes = obj
    return SamplingRecord(trials, successes)


@dataclass(frozen=True)
class InputRecord:
    """One input to certify.

    ``q_count`` may be omitted for a record whose Q budget was merged into
    the P counts; such records are certified with P alone.
    """

    id: str
    d: int
    sigma: float
    p_count: SamplingRecord
    q_count: Optional[SamplingRecord] = None
    k: Optional[int] = None
    q_family: str = "trunc"
    T: Optional[float] = None
    beta: Optional[float] = None

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 2:
            raise InputError(f"d must be an integer >= 2, got {self.d}")
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise InputError("sigma must be positive and finite")
        if self.q_family not in Q_FAMILIES:
            raise InputError(f"q_family must be one of {Q_FAMILIES}")
        if self.q_family == "trunc" and self.beta is not None:
            raise InputError("beta applies to the var family only")
        if self.q_family == "var" and self.T is not None:
            raise InputError("T applies to the trunc family only")
        object.__setattr__(self, "p_count", _count(self.p_count))
        object.__setattr__(self, "q_count", _count(self.q_count))

    @classmethod
    def from_dict(cls, obj: dict) -> "InputRecord":
        known = {"id", "d", "sigma", "k", "q_family", "T", "beta", "p_count", "q_count"}
        extra = set(obj) - known
        if extra:
            raise InputError(f"unknown fields: {sorted(extra)}")
        for req in ("id", "d", "sigma", "p_count"):
            if req not in obj:
                raise InputError(f"missing field {req!r}")
        try:
            return cls(id=str(obj["id"]), d=obj["d"], sigma=float(obj["sigma"]),
                       p_count=obj["p_count"], q_count=obj.get("q_count"), k=obj.get("k"),
                       q_family=obj.get("q_family", "trunc"), T=obj.get("T"), beta=obj.get("beta"))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, InputError):
                raise
            raise InputError(f"malformed record: {exc}") from exc

    def to_dict(self) -> dict:
        out: dict[str, Any] = {"id": self.id, "d": int(self.d), "sigma": self.sigma}
        if self.k is not None:
            out["k"] = int(self.k)
        out["q_family"] = self.q_family
        if self.T is not None:
            out["T"] = self.T
        if self.beta is not None:
            out["beta"] = self.beta
        out["p_count"] = {"trials": self.p_count.trials, "successes": self.p_count.successes}
        if self.q_count is not None:
            out["q_count"] = {"trials": self.q_count.trials, "successes": self.q_count.successes}
        return out


@dataclass(frozen=True)
class RunConfig:
    alpha: float = 0.001
    delta_int: float = DELTA_INT
    eps_radius: float = EPS_RADIUS
    r_max: Optional[float] = None
    workers: int = 1
    seed: int = 0
    fallback_enabled: bool = False
    k: Optional[int] = None
    heuristic: HeuristicConfig = field(default_factory=HeuristicConfig)

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise InputError("alpha must lie in (0, 1)")
        for name in ("delta_int", "eps_radius"):
            if not getattr(self, name) > 0:
                raise InputError(f"{name} must be positive")
        if self.r_max is not None and not self.r_max > 0:
            raise InputError("r_max must be positive")
        if int(self.workers) != self.workers or self.workers < 1:
            raise InputError("workers must be a positive integer")


@dataclass
class ResultRow:
    id: str
    p_lo: Optional[float] = None
    p_hi: Optional[float] = None
    q_lo: Optional[float] = None
    q_hi: Optional[float] = None
    T: Optional[float] = None
    radius_np: Optional[float] = None
    radius_dsrs: Optional[float] = None
    radius_linf_dsrs: Optional[float] = None
    abstained: bool = False
    error: str = ""

    def as_list(self) -> list:
        return [getattr(self, f) for f in CSV_FIELDS]


def _resolve_k(rec: InputRecord, cfg: RunConfig) -> int:
    if rec.k is not None:
        return int(rec.k)
    if cfg.k is not None:
        return int(cfg.k)
    return default_k(rec.d)


def certify_record(rec: InputRecord, cfg: RunConfig = RunConfig()) -> ResultRow:
    """Certify one record; input problems become an error entry on the row.

    Records without Q counts, and with ``fallback_enabled`` records whose P
    counts are all successes, are certified from P alone with the whole
    significance budget on a one-sided bound.
    """
    row = ResultRow(rec.id)
    try:
        k = _resolve_k(rec, cfg)
        p_spec = SmoothingSpec.gaussian(rec.d, rec.sigma, k)
        r_max = cfg.r_max if cfg.r_max is not None else rec.sigma * math.sqrt(rec.d)
        if rec.q_count is None or (cfg.fallback_enabled and fallback_decision(rec.p_count)):
            return _certify_p_only(rec, p_spec, r_max, cfg, row)
        alpha_p, alpha_q = split_budget(cfg.alpha)
        p_box = binom_interval(rec.p_count, alpha_p, Sidedness.TWO_SIDED)
        q_box = binom_interval(rec.q_count, alpha_q, Sidedness.TWO_SIDED)
        row.p_lo, row.p_hi, row.q_lo, row.q_hi = p_box.lo, p_box.hi, q_box.lo, q_box.hi
        if rec.q_family == "trunc":
            T = rec.T
            if T is None:
                T = t_from_pa(min(max(p_box.lo, 1e-12), 1.0 - 1e-12), p_spec, cfg.heuristic)
            q_spec = p_spec.truncate(T)
            row.T = T
        else:
            q_spec = SmoothingSpec.gaussian(rec.d, rec.beta if rec.beta is not None
                                            else default_beta(rec.sigma), k)
        ctx = CertContext(p_spec, q_spec, delta_int=cfg.delta_int, eps_radius=cfg.eps_radius)
        out = certify(p_box, q_box, ctx, r_max=r_max)
    except InputError as exc:
        row.error = f"input: {exc}"
        return row
    except (AbstainError, InfeasibleError) as exc:
        row.abstained = True
        row.radius_np = row.radius_dsrs = row.radius_linf_dsrs = 0.0
        row.error = f"abstain: {exc}"
        return row
    row.radius_np = out.radius_np
    row.radius_dsrs = out.radius_dsrs
    row.radius_linf_dsrs = out.radius_linf(rec.d)
    row.abstained = out.abstained
    return row


def _certify_p_only(rec, p_spec, r_max, cfg, row):
    box = binom_interval(rec.p_count, cfg.alpha, Sidedness.LOWER_ONLY)
    row.p_lo, row.p_hi = box.lo, box.hi
    ctx = CertContext(p_spec, delta_int=cfg.delta_int, eps_radius=cfg.eps_radius)
    try:
        r = np_radius(box.lo, p_spec, ctx, r_max=r_max)
    except AbstainError as exc:
        row.abstained = True
        row.radius_np = row.radius_dsrs = row.radius_linf_dsrs = 0.0
        row.error = f"abstain: {exc}"
        return row
    row.radius_np = row.radius_dsrs = r
    row.radius_linf_dsrs = r / math.sqrt(rec.d)
    return row

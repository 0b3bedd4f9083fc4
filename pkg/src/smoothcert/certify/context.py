"""Value types shared by the certification routines."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Optional

from ..distributions import SmoothingSpec, nu as _nu
from ..errors import InputError
from ..numerics import LogScalar, signed_log_sum
from ..quadrature import GammaQuadrature

DELTA_INT = 1.5e-8
EPS_DUAL = 1e-9
EPS_RADIUS = 1e-4
EXPAND_CAP = 200
BOUNDARY_TOL = 1e-9


class CertContext:
    """Problem data for one candidate radius.

    ``q_kind`` is ``"trunc"`` when Q is P truncated to a ball and ``"var"``
    when Q is a generalized Gaussian with a different scale. Quadrature
    objects (and their node caches) are shared by every context derived via
    :meth:`with_radius`, so one certification call reuses them across radii.
    """

    def __init__(self, p_spec: SmoothingSpec, q_spec: Optional[SmoothingSpec] = None, r: float = 0.0,
                 delta_int: float = DELTA_INT, eps_dual: float = EPS_DUAL, eps_radius: float = EPS_RADIUS,
                 expand_cap: int = EXPAND_CAP, _quad: Optional[GammaQuadrature] = None,
                 _hints: Optional[dict] = None):
        if p_spec.family.truncated:
            raise InputError("P must be an untruncated family")
        if q_spec is not None:
            if q_spec.d != p_spec.d or q_spec.k != p_spec.k:
                raise InputError("P and Q must share d and k")
            if q_spec.family.truncated:
                if q_spec.sigma != p_spec.sigma:
                    raise InputError("a truncated Q must truncate P itself")
                self.q_kind = "trunc"
            else:
                if q_spec.sigma == p_spec.sigma:
                    raise InputError("an untruncated Q needs a different sigma")
                self.q_kind = "var"
        else:
            self.q_kind = "none"
        if not (r >= 0 and math.isfinite(r)):
            raise InputError("radius must be finite and nonnegative")
        for name, v in (("delta_int", delta_int), ("eps_dual", eps_dual), ("eps_radius", eps_radius)):
            if not v > 0:
                raise InputError(f"{name} must be positive")
        self.p_spec = p_spec
        self.q_spec = q_spec
        self.r = float(r)
        self.delta_int = float(delta_int)
        self.eps_dual = float(eps_dual)
        self.eps_radius = float(eps_radius)
        self.expand_cap = int(expand_cap)
        self.nu = _nu(q_spec) if self.q_kind == "trunc" else 1.0
        self.quad = _quad if _quad is not None else GammaQuadrature(p_spec.shape, self.delta_int)
        # last solutions of the scalar searches; only used as starting brackets
        self.hints = _hints if _hints is not None else {}

    def with_radius(self, r: float) -> "CertContext":
        return CertContext(self.p_spec, self.q_spec, r, self.delta_int, self.eps_dual,
                           self.eps_radius, self.expand_cap, _quad=self.quad, _hints=self.hints)

    # shorthand used throughout the integrands
    @property
    def sp(self) -> float:
        return self.p_spec.sigma_prime

    @property
    def k(self) -> int:
        return self.p_spec.k

    @property
    def beta_shape(self) -> float:
        return (self.p_spec.d - 1) / 2.0

    @property
    def u_cut(self) -> float:
        """CDF value of the truncation point under P's radial law."""
        return 1.0 / self.nu if self.q_kind == "trunc" else 1.0

    def __repr__(self):
        return (f"CertContext(q_kind={self.q_kind!r}, d={self.p_spec.d}, k={self.k}, "
                f"sigma={self.p_spec.sigma}, r={self.r})")


@dataclass(frozen=True)
class DualPoint:
    """Dual variables with the brackets they were read from.

    ``a`` is the combination ``lambda1 + nu * lambda2`` that governs the
    region inside the truncation ball; it is stored explicitly because the
    degenerate cases pair an infinite ``lambda2`` with a finite ``lambda1``.
    Brackets hold log values.
    """

    lambda1: LogScalar
    lambda2: LogScalar
    lambda1_bracket: tuple = (-math.inf, math.inf)
    sum_bracket: tuple = (-math.inf, math.inf)
    a: Optional[LogScalar] = None
    nu: float = 1.0
    # ("ball" | "shell", radius) when the constraints pin the classifier to a
    # centered ball or its complement and the multipliers diverge
    region: Optional[tuple] = None

    def __post_init__(self):
        if self.region is not None and self.a is None:
            object.__setattr__(self, "a", LogScalar.zero())
        if self.a is None:
            l1, l2 = self.lambda1, self.lambda2
            if l1.is_infinite and l2.is_infinite and l1.sign != l2.sign:
                raise InputError("lambda1 + nu*lambda2 is indeterminate")
            a = signed_log_sum([(l1.sign, l1.log_magnitude),
                                (l2.sign * self.nu, l2.log_magnitude)])
            object.__setattr__(self, "a", a)

    @classmethod
    def from_logs(cls, log_l1: float, log_l2: float, nu: float = 1.0) -> "DualPoint":
        return cls(LogScalar.from_log(log_l1), LogScalar.from_log(log_l2), nu=nu)


@dataclass
class CertOutcome:
    radius_np: float
    radius_dsrs: float
    abstained: bool = False
    diagnostics: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.abstained:
            self.radius_np = 0.0
            self.radius_dsrs = 0.0
        if self.radius_dsrs < 0 or self.radius_np < 0:
            raise InputError("radii must be nonnegative")

    def radius_linf(self, d: int) -> float:
        return self.radius_dsrs / math.sqrt(d)

"""Isotropic smoothing distributions and their radial laws.

All four families reduce to a statement about ``t = ||eps||^2 / (2 sigma'^2)``,
which is ``Gamma(d/2 - k, 1)`` (conditioned on ``t <= T^2 / (2 sigma'^2)``
for the truncated ones).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy import special

from .errors import InputError
from .numerics import LogScalar, reg_gamma_cdf, reg_gamma_cdf_inv

__all__ = [
    "Family",
    "SmoothingSpec",
    "RadialSample",
    "sigma_prime",
    "ball_mass",
    "nu",
    "log_radial_density",
    "sample",
    "sample_t",
]


class Family(str, enum.Enum):
    STANDARD = "StandardGaussian"
    GENERALIZED = "GeneralizedGaussian"
    TRUNCATED_STANDARD = "TruncatedStandardGaussian"
    TRUNCATED_GENERALIZED = "TruncatedGeneralizedGaussian"

    @property
    def truncated(self) -> bool:
        return self in (Family.TRUNCATED_STANDARD, Family.TRUNCATED_GENERALIZED)

    @property
    def generalized(self) -> bool:
        return self in (Family.GENERALIZED, Family.TRUNCATED_GENERALIZED)


@dataclass(frozen=True)
class SmoothingSpec:
    family: Family
    d: int
    sigma: float
    k: int = 0
    T: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if int(self.d) != self.d or self.d < 1:
            raise InputError(f"d must be a positive integer, got {self.d}")
        object.__setattr__(self, "d", int(self.d))
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise InputError(f"sigma must be positive, got {self.sigma}")
        if int(self.k) != self.k or self.k < 0:
            raise InputError(f"k must be a nonnegative integer, got {self.k}")
        object.__setattr__(self, "k", int(self.k))
        if not self.family.generalized and self.k != 0:
            raise InputError("standard families require k = 0")
        if 2 * self.k >= self.d:
            raise InputError(f"need 2k < d, got k={self.k}, d={self.d}")
        if self.family.truncated:
            if self.T is None or not (self.T > 0 and math.isfinite(self.T)):
                raise InputError("truncated families need a finite T > 0")
            object.__setattr__(self, "T", float(self.T))
        elif self.T is not None:
            raise InputError("T is only meaningful for truncated families")

    @classmethod
    def gaussian(cls, d: int, sigma: float, k: int = 0, T: Optional[float] = None) -> "SmoothingSpec":
        """Pick the family from ``k`` and ``T``."""
        if T is None:
            fam = Family.GENERALIZED if k > 0 else Family.STANDARD
        else:
            fam = Family.TRUNCATED_GENERALIZED if k > 0 else Family.TRUNCATED_STANDARD
        return cls(fam, d, sigma, k, T)

    @property
    def shape(self) -> float:
        """Gamma shape of the radial variable, ``d/2 - k``."""
        return self.d / 2.0 - self.k

    @property
    def sigma_prime(self) -> float:
        return sigma_prime(self)

    @property
    def t_cut(self) -> float:
        """Truncation point in ``t`` units (``inf`` when untruncated)."""
        if not self.family.truncated:
            return math.inf
        return self.T ** 2 / (2.0 * self.sigma_prime ** 2)

    def untruncated(self) -> "SmoothingSpec":
        fam = Family.GENERALIZED if self.family.generalized else Family.STANDARD
        return replace(self, family=fam, T=None)

    def truncate(self, T: float) -> "SmoothingSpec":
        fam = Family.TRUNCATED_GENERALIZED if self.family.generalized else Family.TRUNCATED_STANDARD
        return replace(self, family=fam, T=float(T))


@dataclass(frozen=True)
class RadialSample:
    radius: float
    direction: Optional[np.ndarray] = None


def sigma_prime(spec: SmoothingSpec) -> float:
    return math.sqrt(spec.d / (spec.d - 2.0 * spec.k)) * spec.sigma


def _untruncated_mass(spec: SmoothingSpec, R):
    R = np.asarray(R, dtype=float)
    return reg_gamma_cdf(spec.shape, R ** 2 / (2.0 * spec.sigma_prime ** 2))


def ball_mass(spec: SmoothingSpec, R):
    """Probability that a draw from ``spec`` has norm at most ``R``."""
    if np.any(np.asarray(R) < 0):
        raise InputError("R must be nonnegative")
    m = _untruncated_mass(spec, R)
    if spec.family.truncated:
        m = np.minimum(1.0, np.asarray(m) * nu(spec))
        m = float(m) if np.ndim(m) == 0 else m
    return m


def nu(spec: SmoothingSpec) -> float:
    """Reciprocal of the parent's mass inside the truncation ball."""
    if not spec.family.truncated:
        raise InputError("nu is defined for truncated families only")
    mass = reg_gamma_cdf(spec.shape, spec.t_cut)
    if mass <= 0:
        raise InputError("truncation ball carries no probability mass")
    return 1.0 / mass


def _log_norm_const(spec: SmoothingSpec) -> float:
    sp2 = spec.sigma_prime ** 2
    return (special.gammaln(spec.d / 2.0) - special.gammaln(spec.shape)
            - spec.shape * math.log(2.0 * sp2) - (spec.d / 2.0) * math.log(math.pi))


def log_radial_density(spec: SmoothingSpec, r: float) -> LogScalar:
    """Log of the d-dimensional density at any point of norm ``r``."""
    if not r > 0:
        raise InputError("r must be positive")
    if spec.family.truncated and r > spec.T:
        return LogScalar.zero()
    val = _log_norm_const(spec) - 2.0 * spec.k * math.log(r) - r * r / (2.0 * spec.sigma_prime ** 2)
    if spec.family.truncated:
        val += math.log(nu(spec))
    return LogScalar.from_log(val)


def sample_t(spec: SmoothingSpec, rng: np.random.Generator, n: int) -> np.ndarray:
    """Draw ``n`` radial variables ``t``; radius is ``sigma' * sqrt(2 t)``."""
    if spec.family.truncated:
        u = rng.random(n) / nu(spec)
        return reg_gamma_cdf_inv(spec.shape, np.atleast_1d(u))
    return rng.standard_gamma(spec.shape, size=n)


def sample(spec: SmoothingSpec, rng: np.random.Generator, with_direction: bool = False) -> RadialSample:
    t = sample_t(spec, rng, 1)[0]
    radius = spec.sigma_prime * math.sqrt(2.0 * t)
    direction = None
    if with_direction:
        v = rng.standard_normal(spec.d)
        direction = v / np.linalg.norm(v)
    return RadialSample(radius, direction)

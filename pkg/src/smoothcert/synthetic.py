"""Ball base classifier with closed-form smoothed probabilities.

The classifier predicts the true class exactly when the perturbed input lies
within ``T_true`` of the clean input. Every in-scope smoothing law is
isotropic, so its smoothed probability under a shift of norm ``u`` depends on
``u`` alone and reduces to a one-dimensional expectation over the radial
variable. This gives exact P_A/Q_A values, exact robust radii, and a cheap
sampler for end-to-end runs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from .certify.context import DELTA_INT, EPS_RADIUS, CertContext
from .certify.integrals import shifted_ball_mass
from .confidence import SamplingRecord
from .distributions import SmoothingSpec, ball_mass, sample_t
from .errors import InputError
from .heuristics import default_k
from .numerics import reg_gamma_cdf_inv
from .quadrature import GammaQuadrature

__all__ = [
    "BallClassifier",
    "analytic_shifted_prob",
    "true_radius",
    "exact_pa_qa",
    "mc_sample_classifier",
    "GridPoint",
    "oracle_grid",
    "ball_for_mass",
    "q_spec_for",
    "OracleRow",
    "oracle_check_point",
    "sample_record",
]


@dataclass(frozen=True)
class BallClassifier:
    T_true: float
    d: int

    def __post_init__(self):
        if not self.T_true >= 0:
            raise InputError("T_true must be nonnegative")
        if int(self.d) != self.d or self.d < 2:
            raise InputError("d must be an integer >= 2")

    def predict_norm(self, norms):
        """1 where a perturbation of the given norm keeps the true class."""
        return (np.asarray(norms) <= self.T_true).astype(int)


def _check_spec(clf: BallClassifier, spec: SmoothingSpec):
    if spec.d != clf.d:
        raise InputError("classifier and smoothing spec disagree on d")


def analytic_shifted_prob(clf: BallClassifier, p_spec: SmoothingSpec, u: float,
                          delta_int: float = DELTA_INT, quad: Optional[GammaQuadrature] = None) -> float:
    """Probability of the true class when the input is shifted by norm ``u``.

    ``quad`` lets repeated calls for the same spec share quadrature nodes.
    """
    _check_spec(clf, p_spec)
    if not u >= 0:
        raise InputError("shift must be nonnegative")
    if p_spec.family.truncated:
        raise InputError("shifted probabilities are computed for untruncated P")
    if clf.T_true == 0:
        return 0.0
    if math.isinf(clf.T_true):
        return 1.0
    ctx = CertContext(p_spec, r=u, delta_int=delta_int, _quad=quad)
    return float(min(max(shifted_ball_mass(clf.T_true, ctx), 0.0), 1.0))


def true_radius(clf: BallClassifier, p_spec: SmoothingSpec, eps_radius: float = EPS_RADIUS,
                delta_int: float = DELTA_INT) -> float:
    """Largest shift keeping the smoothed probability above one half, to ``eps_radius``.

    Bisection is valid because the shifted probability is nonincreasing in
    the shift norm.
    """
    quad = GammaQuadrature(p_spec.shape, delta_int)

    def prob(u):
        return analytic_shifted_prob(clf, p_spec, u, delta_int, quad)

    if prob(0.0) <= 0.5:
        return 0.0
    lo, hi = 0.0, max(p_spec.sigma, eps_radius)
    while prob(hi) > 0.5:
        lo, hi = hi, 2.0 * hi
        if hi > 1e12:
            return math.inf
    while hi - lo > 0.1 * eps_radius:
        mid = 0.5 * (lo + hi)
        if prob(mid) > 0.5:
            lo = mid
        else:
            hi = mid
    return lo


def exact_pa_qa(clf: BallClassifier, p_spec: SmoothingSpec, q_spec: SmoothingSpec) -> tuple[float, float]:
    _check_spec(clf, p_spec)
    _check_spec(clf, q_spec)
    if math.isinf(clf.T_true):
        return 1.0, 1.0
    return float(ball_mass(p_spec, clf.T_true)), float(ball_mass(q_spec, clf.T_true))


def mc_sample_classifier(clf: BallClassifier, spec: SmoothingSpec, N: int, seed) -> SamplingRecord:
    """Count how many of ``N`` draws from ``spec`` the classifier gets right."""
    _check_spec(clf, spec)
    if int(N) != N or N < 1:
        raise InputError("N must be a positive integer")
    rng = np.random.default_rng(seed)
    t = sample_t(spec, rng, int(N))
    norms = spec.sigma_prime * np.sqrt(2.0 * t)
    return SamplingRecord(int(N), int(clf.predict_norm(norms).sum()))


def ball_for_mass(spec: SmoothingSpec, mass: float) -> float:
    """Radius of the centered ball carrying ``mass`` under an untruncated ``spec``."""
    if not 0.0 <= mass <= 1.0:
        raise InputError("mass must be a probability")
    if mass == 1.0:
        return math.inf
    return spec.sigma_prime * math.sqrt(2.0 * float(reg_gamma_cdf_inv(spec.shape, mass)))


@dataclass(frozen=True)
class GridPoint:
    d: int
    sigma: float
    k: int
    p_a: float

    @property
    def p_spec(self) -> SmoothingSpec:
        return SmoothingSpec.gaussian(self.d, self.sigma, self.k)

    @property
    def classifier(self) -> BallClassifier:
        return BallClassifier(ball_for_mass(self.p_spec, self.p_a), self.d)

    @property
    def label(self) -> str:
        return f"d={self.d},sigma={self.sigma},k={self.k},pa={self.p_a}"


SMALL_D_K = 2  # k for dimensions below the default_k table's range


def oracle_grid(dims=(20, 784, 3072), sigmas=(0.25, 0.5, 1.0),
                pas=(0.6, 0.75, 0.9), k: Optional[int] = None) -> Iterator[GridPoint]:
    for d in dims:
        kk = k if k is not None else (default_k(d) if d >= 26 else SMALL_D_K)
        for s in sigmas:
            for p in pas:
                yield GridPoint(int(d), float(s), int(kk), float(p))


def q_spec_for(p_spec: SmoothingSpec, family: str, pa_lower: float, T: Optional[float] = None,
               beta: Optional[float] = None) -> SmoothingSpec:
    """The additional distribution for ``family`` ("trunc" or "var")."""
    from .heuristics import default_beta, t_from_pa
    if family == "trunc":
        return p_spec.truncate(T if T is not None else t_from_pa(pa_lower, p_spec))
    if family == "var":
        b = beta if beta is not None else default_beta(p_spec.sigma)
        return SmoothingSpec.gaussian(p_spec.d, b, p_spec.k)
    raise InputError(f"unknown Q family {family!r}")


@dataclass
class OracleRow:
    label: str
    family: str
    p_a: float
    q_a: float
    radius_true: float
    radius_np: float
    radius_dsrs: float
    abstained: bool
    sound: bool
    dominant: bool
    seconds: float

    @property
    def ok(self) -> bool:
        return self.sound and self.dominant


def oracle_check_point(gp: GridPoint, family: str, eps_radius: float = EPS_RADIUS,
                       delta_int: float = DELTA_INT, inflate: float = 0.0) -> OracleRow:
    """Certify a grid point with exact probabilities and compare against the truth.

    ``inflate`` adds a fixed amount to the certified radius; it exists to
    check that the harness notices unsound output.
    """
    import time

    from .certify.engine import certify
    from .confidence import ProbBound

    t0 = time.perf_counter()
    clf, p_spec = gp.classifier, gp.p_spec
    q_spec = q_spec_for(p_spec, family, gp.p_a)
    p_a, q_a = exact_pa_qa(clf, p_spec, q_spec)
    ctx = CertContext(p_spec, q_spec, delta_int=delta_int, eps_radius=eps_radius)
    out = certify(ProbBound.point(p_a), ProbBound.point(q_a), ctx)
    r_true = true_radius(clf, p_spec, eps_radius, delta_int)
    r_dsrs = out.radius_dsrs + inflate
    return OracleRow(gp.label, family, p_a, q_a, r_true, out.radius_np, r_dsrs, bool(out.abstained),
                     sound=bool(r_dsrs <= r_true + eps_radius),
                     dominant=bool(out.abstained or r_dsrs >= out.radius_np - eps_radius),
                     seconds=time.perf_counter() - t0)


def sample_record(clf: BallClassifier, p_spec: SmoothingSpec, N: int, seed, family: str = "trunc",
                  alpha: float = 0.001, T: Optional[float] = None, beta: Optional[float] = None,
                  fallback: bool = False, record_id: str = "0", heuristic=None):
    """Simulate the sampling half of the pipeline for one input.

    Half the budget goes to P and half to Q. The trunc family's radius
    comes from the P counts when not given, so P is sampled first. With
    ``fallback`` and a perfect P run, the Q half is spent on P as well and
    the record carries P counts only.
    """
    from .confidence import Sidedness, binom_interval, fallback_decision, merge_records, split_budget
    from .heuristics import HeuristicConfig, t_from_pa
    from .pipeline import InputRecord

    if int(N) != N or N < 2:
        raise InputError("N must be an integer >= 2")
    heuristic = heuristic or HeuristicConfig()
    n_p = int(N) // 2
    n_q = int(N) - n_p
    p_seed, q_seed = np.random.SeedSequence(seed).spawn(2)
    p_rec = mc_sample_classifier(clf, p_spec, n_p, p_seed)
    common = dict(id=record_id, d=p_spec.d, sigma=p_spec.sigma, k=p_spec.k, q_family=family)
    if fallback and fallback_decision(p_rec):
        extra = mc_sample_classifier(clf, p_spec, n_q, q_seed)
        return InputRecord(p_count=merge_records(p_rec, extra), **common)
    if family == "trunc":
        if T is None:
            p_lo = binom_interval(p_rec, split_budget(alpha)[0], Sidedness.TWO_SIDED).lo
            T = t_from_pa(min(max(p_lo, 1e-12), 1.0 - 1e-12), p_spec, heuristic)
        q_spec = p_spec.truncate(T)
        q_rec = mc_sample_classifier(clf, q_spec, n_q, q_seed)
        return InputRecord(p_count=p_rec, q_count=q_rec, T=T, **common)
    q_spec = q_spec_for(p_spec, "var", 0.5, beta=beta)
    q_rec = mc_sample_classifier(clf, q_spec, n_q, q_seed)
    return InputRecord(p_count=p_rec, q_count=q_rec, beta=q_spec.sigma, **common)

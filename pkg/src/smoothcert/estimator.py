"""scikit-learn style wrapper around the per-record pipeline."""
from __future__ import annotations

from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .certify.context import DELTA_INT, EPS_RADIUS
from .distributions import SmoothingSpec
from .errors import InputError
from .heuristics import default_k
from .pipeline import InputRecord, RunConfig, certify_record

__all__ = ["DSRSCertifier"]


class DSRSCertifier(BaseEstimator):
    """Certified l2 radii from sampling counts.

    ``X`` has one row per input with columns
    ``(p_trials, p_successes, q_trials, q_successes)``; ``predict`` returns
    the two-distribution radius of each row (0 for abstentions).
    Nothing is learned from data: ``fit`` validates the hyperparameters and
    freezes the smoothing distribution.

    Examples
    --------
    >>> est = DSRSCertifier(d=784, sigma=0.5).fit()
    >>> est.predict([[50000, 37500, 50000, 50000]])   # doctest: +SKIP
    array([0.83...])
    """

    def __init__(self, d: int = 784, sigma: float = 0.5, k: Optional[int] = None,
                 q_family: str = "trunc", T: Optional[float] = None, beta: Optional[float] = None,
                 alpha: float = 0.001, delta_int: float = DELTA_INT, eps_radius: float = EPS_RADIUS,
                 r_max: Optional[float] = None, fallback: bool = False):
        self.d = d
        self.sigma = sigma
        self.k = k
        self.q_family = q_family
        self.T = T
        self.beta = beta
        self.alpha = alpha
        self.delta_int = delta_int
        self.eps_radius = eps_radius
        self.r_max = r_max
        self.fallback = fallback

    def fit(self, X=None, y=None):
        self.k_ = int(self.k) if self.k is not None else default_k(self.d)
        self.p_spec_ = SmoothingSpec.gaussian(self.d, self.sigma, self.k_)
        self.config_ = RunConfig(alpha=self.alpha, delta_int=self.delta_int,
                                 eps_radius=self.eps_radius, r_max=self.r_max,
                                 fallback_enabled=self.fallback, k=self.k_)
        # builds a record once so family/parameter clashes surface here
        self._record("check", (1, 1), (1, 1))
        return self

    def _record(self, ident, p, q):
        return InputRecord(id=str(ident), d=self.d, sigma=self.sigma, k=self.k_, q_family=self.q_family,
                           T=self.T, beta=self.beta, p_count=p, q_count=q)

    def _rows(self, X):
        X = np.asarray(X)
        if X.ndim != 2 or X.shape[1] != 4:
            raise InputError("X must have shape (n, 4): p_trials, p_successes, q_trials, q_successes")
        if not np.all(X == np.round(X)):
            raise InputError("counts must be integers")
        X = X.astype(np.int64)
        return [self._record(i, (int(r[0]), int(r[1])), (int(r[2]), int(r[3]))) for i, r in enumerate(X)]

    def certify(self, X) -> list:
        """Full result rows (boxes, both radii, abstention flags)."""
        check_is_fitted(self, "config_")
        rows = [certify_record(rec, self.config_) for rec in self._rows(X)]
        for r in rows:
            if r.error.startswith("input:"):
                raise InputError(f"row {r.id}: {r.error}")
        return rows

    def predict(self, X) -> np.ndarray:
        return np.array([0.0 if r.abstained else r.radius_dsrs for r in self.certify(X)])

    def predict_np(self, X) -> np.ndarray:
        """Radii certified from the P counts alone (the single-distribution baseline)."""
        return np.array([0.0 if r.abstained else r.radius_np for r in self.certify(X)])

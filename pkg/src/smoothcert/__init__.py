"""Certified robustness radii for randomized smoothing with two sampling distributions."""
from .certify import CertContext, CertOutcome, DualPoint, certify, check_radius, np_radius
from .confidence import ProbBound, SamplingRecord, Sidedness, binom_interval, split_budget
from .distributions import Family, SmoothingSpec, ball_mass, nu
from .errors import AbstainError, InfeasibleError, InputError
from .estimator import DSRSCertifier
from .heuristics import HeuristicConfig, default_k, t_from_pa

__version__ = "0.1.0"

__all__ = [
    "AbstainError", "InfeasibleError", "InputError",
    "Family", "SmoothingSpec", "ball_mass", "nu",
    "ProbBound", "SamplingRecord", "Sidedness", "binom_interval", "split_budget",
    "CertContext", "CertOutcome", "DualPoint", "certify", "check_radius", "np_radius",
    "HeuristicConfig", "default_k", "t_from_pa",
    "DSRSCertifier",
]

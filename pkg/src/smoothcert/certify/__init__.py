"""Integrals, dual solvers and radius search."""
from .context import BOUNDARY_TOL, DELTA_INT, EPS_DUAL, EPS_RADIUS, CertContext, CertOutcome, DualPoint
from .dual import dual_solve_truncated, dual_solve_var, solve_np_lambda, solve_q_only, var_boundary
from .engine import certify, check_radius, np_radius, solve_dual, worst_case_pa_qa
from .integrals import compute_P, compute_Q, compute_R, h, u1, u2, u3

__all__ = [
    "BOUNDARY_TOL", "DELTA_INT", "EPS_DUAL", "EPS_RADIUS",
    "CertContext", "CertOutcome", "DualPoint",
    "compute_P", "compute_Q", "compute_R", "h", "u1", "u2", "u3",
    "solve_np_lambda", "solve_q_only", "dual_solve_truncated", "dual_solve_var",
    "var_boundary",
    "worst_case_pa_qa", "solve_dual", "np_radius", "check_radius", "certify",
]

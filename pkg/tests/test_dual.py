import math

import pytest

from smoothcert.certify import (CertContext, DualPoint, compute_P, compute_Q, compute_R, dual_solve_truncated,
                                dual_solve_var, solve_np_lambda, var_boundary)
from smoothcert.certify.dual import feasible_truncated
from smoothcert.distributions import SmoothingSpec, ball_mass
from smoothcert.errors import InfeasibleError, InputError
from smoothcert.numerics import LogScalar

L = LogScalar.from_float


def _forward(ctx, l1, l2):
    dual = DualPoint(L(l1), L(l2), nu=ctx.nu)
    return compute_P(dual, ctx), compute_Q(dual, ctx), compute_R(dual, ctx)


@pytest.mark.parametrize("l1,l2", [(1.5, 0.5), (0.8, -0.3), (3.0, 0.05)])
def test_truncated_round_trip(small_trunc, l1, l2):
    ctx = small_trunc
    P, Q, R = _forward(ctx, l1, l2)
    nominal = dual_solve_truncated(P, Q, ctx, sound=False)
    assert compute_P(nominal, ctx) == pytest.approx(P, abs=3 * ctx.delta_int)
    assert compute_Q(nominal, ctx) == pytest.approx(Q, abs=3 * ctx.delta_int)
    assert compute_R(nominal, ctx) == pytest.approx(R, abs=3 * ctx.delta_int)
    sound = dual_solve_truncated(P, Q, ctx)
    assert compute_R(sound, ctx) <= R + 3 * ctx.delta_int
    assert compute_R(sound, ctx) >= R - 1e-3


def test_var_round_trip(small_var):
    ctx = small_var
    dual = DualPoint(L(1.2), L(0.4))
    P, Q, R = compute_P(dual, ctx), compute_Q(dual, ctx), compute_R(dual, ctx)
    nominal = dual_solve_var(P, Q, ctx, sound=False)
    assert compute_P(nominal, ctx) == pytest.approx(P, abs=3 * ctx.delta_int)
    assert compute_Q(nominal, ctx) == pytest.approx(Q, abs=3 * ctx.delta_int)
    assert compute_R(nominal, ctx) == pytest.approx(R, abs=3 * ctx.delta_int)
    sound = dual_solve_var(P, Q, ctx)
    assert compute_R(sound, ctx) <= R + 3 * ctx.delta_int


def test_truncated_degenerate_corners(small_trunc):
    ctx = small_trunc
    # whole ball accepted
    P = 1 / ctx.nu + 0.1
    d = dual_solve_truncated(P, 1.0, ctx, sound=False)
    assert d.a.is_infinite and compute_Q(d, ctx) == 1.0
    assert compute_P(d, ctx) == pytest.approx(P, abs=3 * ctx.delta_int)
    # the sound point stays on the low side
    d = dual_solve_truncated(P, 1.0, ctx)
    assert d.a.is_infinite and P - 1e-6 <= compute_P(d, ctx) <= P + ctx.delta_int
    # nothing accepted outside the ball
    d = dual_solve_truncated(0.2 / ctx.nu, 0.2, ctx)
    assert d.lambda1.is_zero
    assert compute_P(d, ctx) == pytest.approx(0.2 / ctx.nu, abs=3 * ctx.delta_int)


def test_truncated_infeasible(small_trunc):
    ctx = small_trunc
    assert not feasible_truncated(0.1, 0.9, ctx.nu)
    with pytest.raises(InfeasibleError):
        dual_solve_truncated(0.1, 0.9, ctx)
    with pytest.raises(InputError):
        dual_solve_truncated(1.2, 0.5, ctx)
    with pytest.raises(InputError):
        dual_solve_var(0.5, 0.5, ctx)


def test_var_boundary_regions(small_var):
    ctx = small_var
    P_A = 0.7
    T_ball = ctx.p_spec.sigma_prime * math.sqrt(2 * __import__("scipy").special.gammaincinv(ctx.p_spec.shape, P_A))
    q_ball = ball_mass(ctx.q_spec, T_ball)
    kind, T = var_boundary(P_A, q_ball, ctx)
    assert kind == "ball" and T == pytest.approx(T_ball)
    d = dual_solve_var(P_A, q_ball, ctx)
    assert d.region == ("ball", T)
    assert compute_P(d, ctx) == pytest.approx(P_A)
    assert compute_Q(d, ctx) == pytest.approx(q_ball)
    assert var_boundary(P_A, 0.5 * (q_ball + 0.5), ctx) is None
    with pytest.raises(InfeasibleError):
        var_boundary(P_A, min(1.0, q_ball + 0.05), ctx)
    with pytest.raises(InputError):
        dual_solve_var(0.0, 0.5, ctx)


def test_np_lambda_edges(small_trunc):
    ctx = small_trunc
    assert solve_np_lambda(0.0, ctx).lo == -math.inf
    assert solve_np_lambda(1.0, ctx).hi == math.inf
    br = solve_np_lambda(0.8, ctx)
    assert br.lo < br.hi and br.width < 1e-6
    with pytest.raises(InputError):
        solve_np_lambda(1.5, ctx)


def test_results_independent_of_call_history(small_trunc):
    ctx = small_trunc.with_radius(0.8)
    P, Q, _ = _forward(ctx, 1.5, 0.5)
    ctx.hints.clear()
    first = dual_solve_truncated(P, Q, ctx)
    ctx.hints.clear()
    dual_solve_truncated(0.6, 0.5, ctx)
    ctx.hints.clear()
    again = dual_solve_truncated(P, Q, ctx)
    assert first == again

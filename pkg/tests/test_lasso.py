import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from covlasso.errors import InvalidDiagonal, NonConvergence
from covlasso.lasso import (LassoSubproblem, kkt_residual_inner, lasso_cd_solve,
                            lasso_objective)

from conftest import random_spd
from oracles import lasso_grid_minimizer, lasso_objective_np


def test_diagonal_v_decouples():
    prob = LassoSubproblem(np.eye(2), [0.5, 0.0], 0.2)
    res = lasso_cd_solve(prob, tol=1e-12)
    np.testing.assert_allclose(res.beta, [0.15, 0.0], atol=1e-15)
    assert kkt_residual_inner(prob, res.beta) <= 1e-12
    assert kkt_residual_inner(prob, [0.15, 0.0]) <= 1e-12


def test_large_penalty_gives_zero(rng):
    for _ in range(10):
        V = random_spd(rng, 4)
        s = rng.standard_normal(4)
        rho = np.abs(s).max()
        prob = LassoSubproblem(V, s, rho)
        res = lasso_cd_solve(prob)
        np.testing.assert_array_equal(res.beta, np.zeros(4))
        assert res.sweeps == 1
        assert kkt_residual_inner(prob, np.zeros(4)) == 0.0


def test_two_dim_example_against_grid_oracle():
    V = np.array([[1.0, 0.3], [0.3, 1.0]])
    s = np.array([0.8, 0.6])
    expected = lasso_grid_minimizer(V, s, 0.1)
    # both coordinates active: 2 V b = s - rho  ->  b = V^-1 (0.35, 0.25)
    np.testing.assert_allclose(expected, np.linalg.solve(V, [0.35, 0.25]), atol=1e-8)
    res = lasso_cd_solve(LassoSubproblem(V, s, 0.1), tol=1e-10)
    np.testing.assert_allclose(res.beta, expected, atol=1e-4)


def test_objective_never_increases(rng):
    for _ in range(20):
        d = int(rng.integers(2, 7))
        V = random_spd(rng, d, cond_floor=0.1)
        s = rng.standard_normal(d)
        rho = float(rng.uniform(0, 0.5))
        prob = LassoSubproblem(V, s, rho, beta0=rng.standard_normal(d))
        res = lasso_cd_solve(prob, tol=1e-9, trace_updates=500)
        vals = [lasso_objective_np(V, s, rho, prob.beta0)]
        vals += [lasso_objective_np(V, s, rho, b) for b in res.trace]
        assert np.all(np.diff(vals) <= 1e-12)


@st.composite
def subproblems(draw):
    d = draw(st.integers(1, 5))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    V = random_spd(rng, d, cond_floor=0.2)
    s = rng.standard_normal(d)
    rho = draw(st.floats(0.0, 1.5))
    return LassoSubproblem(V, s, rho)


@settings(max_examples=60, deadline=None)
@given(subproblems())
def test_kkt_residual_after_solve(prob):
    tol = 1e-7
    res = lasso_cd_solve(prob, tol=tol, max_sweeps=100000)
    assert kkt_residual_inner(prob, res.beta) <= 10 * tol


@settings(max_examples=40, deadline=None)
@given(subproblems())
def test_warm_restart_is_fixed_point(prob):
    tol = 1e-8
    res = lasso_cd_solve(prob, tol=tol, max_sweeps=100000)
    again = lasso_cd_solve(LassoSubproblem(prob.V, prob.s12, prob.rho, res.beta), tol=tol)
    assert again.sweeps == 1
    assert again.max_delta <= tol


@settings(max_examples=40, deadline=None)
@given(subproblems(), st.floats(0.1, 20.0))
def test_scaling_equivariance(prob, c):
    tol = 1e-11
    base = lasso_cd_solve(prob, tol=tol, max_sweeps=100000).beta
    scaled = lasso_cd_solve(LassoSubproblem(prob.V, c * prob.s12, c * prob.rho), tol=tol,
                            max_sweeps=100000).beta
    np.testing.assert_allclose(scaled, c * base, atol=1e-8 * max(1.0, c))


def test_zero_penalty_solves_linear_system(rng):
    for d in range(1, 8):
        V = random_spd(rng, d)
        s = rng.standard_normal(d)
        res = lasso_cd_solve(LassoSubproblem(V, s, 0.0), tol=1e-13, max_sweeps=100000)
        np.testing.assert_allclose(res.beta, np.linalg.solve(2 * V, s), atol=1e-10)


def test_objective_helper_matches_oracle(rng):
    V = random_spd(rng, 3)
    s = rng.standard_normal(3)
    b = rng.standard_normal(3)
    assert lasso_objective(V, s, 0.3, b) == pytest.approx(lasso_objective_np(V, s, 0.3, b))


def test_invalid_diagonal():
    with pytest.raises(InvalidDiagonal):
        lasso_cd_solve(LassoSubproblem(np.array([[0.0, 0.0], [0.0, 1.0]]), [1.0, 1.0], 0.1))


def test_nonconvergence_keeps_iterate(rng):
    V = np.array([[1.0, 0.99], [0.99, 1.0]])
    with pytest.raises(NonConvergence) as info:
        lasso_cd_solve(LassoSubproblem(V, [1.0, -1.0], 0.0), tol=1e-14, max_sweeps=2)
    res = info.value.result
    assert res.sweeps == 2
    assert res.max_delta > 1e-14
    assert np.all(np.isfinite(res.beta))


def test_subproblem_validation():
    with pytest.raises(ValueError):
        LassoSubproblem(np.eye(3), [1.0, 2.0], 0.1)
    with pytest.raises(ValueError):
        LassoSubproblem(np.eye(2), [1.0, 2.0], -0.1)
    with pytest.raises(ValueError):
        LassoSubproblem(np.array([[1.0, 0.5], [0.0, 1.0]]), [1.0, 2.0], 0.1)

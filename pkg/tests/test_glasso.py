import numpy as np
import pytest
from hypothesis import given, strategies as st

from matlda.glasso import (GlassoConvergenceError, UnboundedProblemError, glasso_objective,
                           glasso_solve, kkt_residual)
from oracles import glasso_cvx, random_spd


def sample_cov(rng, p, n):
    Z = rng.standard_normal((n, p)) @ np.linalg.cholesky(random_spd(rng, p, 5.0)).T
    return Z.T @ Z / n


def test_identity_no_penalty():
    sol = glasso_solve(np.eye(4), 0.0)
    np.testing.assert_allclose(sol.theta, np.eye(4))


def test_identity_diagonal_shrinkage():
    # minimize s*t - log t + tau*t  =>  t = 1 / (s + tau)
    sol = glasso_solve(np.eye(3), 0.5)
    np.testing.assert_allclose(sol.theta, np.eye(3) / 1.5, atol=1e-12)


def test_objective_closed_forms():
    d = 3
    assert glasso_objective(np.eye(d), np.eye(d), 0.0) == pytest.approx(d)
    assert glasso_objective(np.eye(d), np.eye(d), 1.0) == pytest.approx(2 * d)
    assert glasso_objective(2 * np.eye(2), np.eye(2), 0.0) == pytest.approx(4 - 2 * np.log(2))


@pytest.mark.parametrize("seed", range(5))
def test_matches_conic_solver(seed):
    rng = np.random.default_rng(seed)
    S = random_spd(rng, 4)
    sol = glasso_solve(S, 0.2)
    _, ref = glasso_cvx(S, 0.2)
    assert glasso_objective(sol.theta, S, 0.2) == pytest.approx(ref, rel=1e-4)
    assert sol.kkt_residual <= 1e-6


@given(st.integers(0, 10_000), st.floats(0.01, 2.0))
def test_kkt_certificate(seed, tau):
    rng = np.random.default_rng(seed)
    S = sample_cov(rng, 6, 20)
    sol = glasso_solve(S, tau)
    assert kkt_residual(sol.theta, S, tau) <= 1e-6
    assert np.linalg.eigvalsh(sol.theta)[0] > 0


def test_singular_input_with_penalty():
    rng = np.random.default_rng(0)
    S = sample_cov(rng, 10, 4)   # rank 4
    assert np.linalg.matrix_rank(S) < 10
    sol = glasso_solve(S, 0.1)
    assert sol.kkt_residual <= 1e-6


def test_sparsity_monotone_in_tau():
    S = sample_cov(np.random.default_rng(7), 8, 30)
    zeros = []
    for tau in [0.01, 0.05, 0.1, 0.2, 0.4, 0.8]:
        th = glasso_solve(S, tau).theta
        zeros.append(int(np.sum(th[~np.eye(8, dtype=bool)] == 0)))
    assert all(a <= b for a, b in zip(zeros, zeros[1:]))


def test_large_tau_gives_diagonal():
    S = sample_cov(np.random.default_rng(8), 6, 30)
    tau = np.abs(S[~np.eye(6, dtype=bool)]).max()
    th = glasso_solve(S, tau).theta
    np.testing.assert_array_equal(th[~np.eye(6, dtype=bool)], 0)
    np.testing.assert_allclose(np.diag(th), 1 / (np.diag(S) + tau), rtol=1e-10)


@pytest.mark.parametrize("seed", range(4))
def test_warm_start_matches_cold(seed):
    rng = np.random.default_rng(seed)
    S = sample_cov(rng, 7, 15)
    cold = glasso_solve(S, 0.1).theta
    for warm in (glasso_solve(S, 0.3).theta, random_spd(rng, 7), np.eye(7)):
        th = glasso_solve(S, 0.1, warm_start=warm).theta
        assert glasso_objective(th, S, 0.1) == pytest.approx(
            glasso_objective(cold, S, 0.1), rel=1e-8)
        assert np.abs(th - cold).max() < 1e-5


def test_unbounded_without_penalty():
    with pytest.raises(UnboundedProblemError):
        glasso_solve(np.diag([1.0, 0.0]), 0.0)
    with pytest.raises(UnboundedProblemError):
        glasso_solve(np.ones((2, 2)), 0.0)


def test_input_validation():
    with pytest.raises(ValueError):
        glasso_solve(np.diag([1.0, -1.0]), 0.1)
    with pytest.raises(ValueError):
        glasso_solve(np.eye(2), -0.1)


def test_iteration_cap_reports_best_iterate():
    S = sample_cov(np.random.default_rng(3), 12, 15)
    with pytest.raises(GlassoConvergenceError) as info:
        glasso_solve(S, 0.01, tol=1e-14, max_iter=1)
    assert info.value.theta is not None
    assert info.value.iterations == 1

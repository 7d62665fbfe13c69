import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from matlda.linalg import (NotPositiveDefiniteError, chol_solve, cholesky, l1_norm, logdet_spd,
                           spd_inverse, sym_eigen, symmetrize, unvec, vec)
from oracles import gauss_solve, random_spd


def test_eigen_identity():
    w, _ = sym_eigen(np.eye(3))
    np.testing.assert_allclose(w, [1, 1, 1])


def test_eigen_diagonal_axes():
    w, V = sym_eigen(np.diag([1.0, 4.0]))
    np.testing.assert_allclose(w, [4, 1])
    np.testing.assert_allclose(np.abs(V), [[0, 1], [1, 0]], atol=1e-14)


def test_eigen_2x2_by_hand():
    # characteristic polynomial (2-x)^2 - 1 has roots 3, 1
    w, _ = sym_eigen([[2.0, 1.0], [1.0, 2.0]])
    np.testing.assert_allclose(w, [3, 1])


@pytest.mark.parametrize("d", [1, 2, 7, 33, 64])
def test_eigen_reconstruction(d):
    rng = np.random.default_rng(d)
    A = rng.standard_normal((d, d))
    A = A + A.T
    w, V = sym_eigen(A)
    assert np.all(np.diff(w) <= 0)
    assert np.abs((V * w) @ V.T - A).max() <= 1e-7
    np.testing.assert_allclose(V.T @ V, np.eye(d), atol=1e-10)


def test_eigen_deterministic():
    A = random_spd(np.random.default_rng(0), 20)
    a, b = sym_eigen(A), sym_eigen(A)
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])


def test_chol_solve_identity():
    B = np.arange(6.0).reshape(3, 2)
    np.testing.assert_array_equal(chol_solve(np.eye(3), B), B)


def test_chol_solve_diag():
    np.testing.assert_allclose(chol_solve(np.diag([2.0, 4.0]), [2.0, 4.0]), [1, 1])


def test_chol_solve_against_elimination(rng):
    A = random_spd(rng, 5)
    B = rng.standard_normal((5, 3))
    X = chol_solve(A, B)
    np.testing.assert_allclose(X, gauss_solve(A, B), rtol=1e-10)
    assert np.abs(A @ X - B).max() <= 1e-8 * np.abs(B).max()


def test_cholesky_reports_pivot():
    A = np.diag([1.0, 2.0, -1.0])
    with pytest.raises(NotPositiveDefiniteError) as info:
        cholesky(A)
    assert info.value.pivot == 3


def test_symmetrize_rejects_nonfinite():
    with pytest.raises(ValueError):
        symmetrize([[1.0, np.nan], [0.0, 1.0]])
    with pytest.raises(ValueError):
        symmetrize(np.ones((2, 3)))


def test_logdet_and_inverse(rng):
    A = random_spd(rng, 6)
    assert logdet_spd(A) == pytest.approx(np.linalg.slogdet(A)[1], rel=1e-12)
    np.testing.assert_allclose(spd_inverse(A) @ A, np.eye(6), atol=1e-10)


def test_l1_examples():
    assert l1_norm(np.eye(2)) == 2
    assert l1_norm([[1, -2], [3, 0]]) == 6


small = st.integers(1, 8)


@given(st.data())
def test_l1_kronecker_identity(data):
    r, c = data.draw(small), data.draw(small)
    el = st.floats(-10, 10, allow_nan=False)
    phi = data.draw(arrays(float, (r, r), elements=el))
    delta = data.draw(arrays(float, (c, c), elements=el))
    lhs = l1_norm(np.kron(delta, phi))
    rhs = l1_norm(delta) * l1_norm(phi)
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-300)


@given(arrays(float, st.tuples(small, small), elements=st.floats(-1e3, 1e3)))
def test_vec_roundtrip(x):
    v = vec(x)
    assert v.shape == (x.size,)
    np.testing.assert_array_equal(v[:x.shape[0]], x[:, 0])
    np.testing.assert_array_equal(unvec(v, *x.shape), x)

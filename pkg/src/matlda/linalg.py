"""Small dense linear-algebra kernels shared by the estimators.

Everything here works on plain ``numpy`` arrays. Symmetric inputs are
symmetrized by averaging with their transpose before use, which absorbs the
floating-point drift that accumulates over many block updates.
"""

import numpy as np
import scipy.linalg


class LinAlgFailure(ArithmeticError):
    """Base class for numerical failures raised by this package."""


class NotPositiveDefiniteError(LinAlgFailure):
    """A matrix that must be positive definite is not.

    Attributes
    ----------
    pivot : int or None
        Index of the first non-positive pivot met by the Cholesky
        factorization, when known.
    """

    def __init__(self, message, pivot=None):
        super().__init__(message)
        self.pivot = pivot


class EigenConvergenceError(LinAlgFailure):
    def __init__(self, message, iterations=None):
        super().__init__(message)
        self.iterations = iterations


def as_matrix(a, name="matrix"):
    """Return ``a`` as a finite 2-D float array."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    return a


def symmetrize(a, name="matrix"):
    """Return ``(a + a.T) / 2`` after checking shape and finiteness."""
    a = as_matrix(a, name)
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")
    return 0.5 * (a + a.T)


def sym_eigen(a):
    """Eigendecomposition of a symmetric matrix.

    Returns
    -------
    eigenvalues : ndarray, shape (d,)
        Sorted in descending order.
    eigenvectors : ndarray, shape (d, d)
        Orthogonal; column ``k`` pairs with ``eigenvalues[k]``.
    """
    a = symmetrize(a)
    try:
        # LAPACK syevd: deterministic for a fixed input.
        w, v = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise EigenConvergenceError(f"symmetric eigensolver failed: {exc}") from exc
    return w[::-1].copy(), v[:, ::-1].copy()


def min_eigenvalue(a):
    return float(np.linalg.eigvalsh(symmetrize(a))[0])


def cholesky(a):
    """Lower Cholesky factor, raising :class:`NotPositiveDefiniteError`."""
    a = symmetrize(a)
    try:
        return scipy.linalg.cholesky(a, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        pivot = _failed_pivot(str(exc))
        raise NotPositiveDefiniteError(
            f"matrix is not positive definite (leading minor {pivot} is not positive)",
            pivot=pivot,
        ) from exc


def _failed_pivot(msg):
    # scipy reports "<k>-th leading minor of the array is not positive definite"
    head = msg.split("-th")[0].strip()
    return int(head) if head.isdigit() else None


def chol_solve(a, b):
    """Solve ``a @ x = b`` for symmetric positive definite ``a``."""
    low = cholesky(a)
    b = np.asarray(b, dtype=float)
    return scipy.linalg.cho_solve((low, True), b, check_finite=False)


def spd_inverse(a):
    """Inverse of an SPD matrix via Cholesky, returned exactly symmetric."""
    inv = chol_solve(a, np.eye(a.shape[0]))
    return 0.5 * (inv + inv.T)


def logdet_spd(a):
    low = cholesky(a)
    return 2.0 * float(np.sum(np.log(np.diag(low))))


def l1_norm(a):
    """Sum of absolute values of all entries."""
    return float(np.abs(np.asarray(a, dtype=float)).sum())


def vec(x):
    """Stack the columns of ``x`` (column-major flattening)."""
    return np.asarray(x).reshape(-1, order="F")


def unvec(v, r, c):
    return np.asarray(v).reshape((r, c), order="F")

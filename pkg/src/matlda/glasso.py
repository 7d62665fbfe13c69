"""L1-penalized Gaussian precision estimation with the diagonal penalized.

Solves ``argmin_{theta > 0} tr(S theta) - log det theta + tau * sum|theta_ab|``
by the column-wise block coordinate descent of Friedman, Hastie & Tibshirani
(2008).  Because the diagonal is penalized, the working covariance keeps
``W_aa = S_aa + tau`` throughout.  Success is certified by the KKT residual of
the returned ``theta``, computed independently of the solver's internal state.
"""

from dataclasses import dataclass

import numba
import numpy as np

from .linalg import (
    LinAlgFailure,
    NotPositiveDefiniteError,
    l1_norm,
    logdet_spd,
    spd_inverse,
    symmetrize,
)

DEFAULT_TOL = 1e-6
DEFAULT_MAX_ITER = 500


class GlassoConvergenceError(LinAlgFailure):
    """Raised when ``max_iter`` sweeps do not reach the KKT tolerance.

    ``theta`` and ``kkt_residual`` hold the best iterate seen.
    """

    def __init__(self, message, theta, kkt_residual, iterations):
        super().__init__(message)
        self.theta = theta
        self.kkt_residual = kkt_residual
        self.iterations = iterations


class UnboundedProblemError(LinAlgFailure):
    pass


@dataclass
class GlassoSolution:
    theta: np.ndarray
    kkt_residual: float
    iterations: int
    covariance: np.ndarray = None


def _check_problem(s, tau):
    s = symmetrize(s, "S")
    if tau < 0 or not np.isfinite(tau):
        raise ValueError(f"tau must be a finite nonnegative number, got {tau}")
    scale = max(float(np.abs(s).max()), 1.0)
    w = np.linalg.eigvalsh(s)
    if w[0] < -1e-8 * scale:
        raise ValueError(f"S is not positive semidefinite (min eigenvalue {w[0]:.3g})")
    return s


def glasso_objective(theta, s, tau):
    """``tr(S theta) - log det theta + tau * ||theta||_1``."""
    theta = symmetrize(theta, "theta")
    return float(np.sum(s * theta)) - logdet_spd(theta) + tau * l1_norm(theta)


def kkt_residual(theta, s, tau, theta_inv=None):
    """Largest violation of the stationarity conditions.

    Nonzero entries need ``S - inv(theta) + tau*sign(theta) = 0``; zero entries
    need ``|S - inv(theta)| <= tau``.
    """
    if theta_inv is None:
        theta_inv = spd_inverse(theta)
    grad = s - theta_inv
    nz = theta != 0
    res = np.where(nz, np.abs(grad + tau * np.sign(theta)),
                   np.maximum(np.abs(grad) - tau, 0.0))
    return float(res.max())


@numba.njit(cache=True)
def _sweep(S, W, B, tau, inner_tol, inner_max):
    # one pass over all columns; B[:, j] holds the lasso coefficients of column j
    p = S.shape[0]
    for j in range(p):
        for it in range(inner_max):
            dmax = 0.0
            for k in range(p):
                if k == j:
                    continue
                acc = S[k, j]
                for l in range(p):
                    if l != j and l != k:
                        acc -= W[k, l] * B[l, j]
                if acc > tau:
                    new = (acc - tau) / W[k, k]
                elif acc < -tau:
                    new = (acc + tau) / W[k, k]
                else:
                    new = 0.0
                d = abs(new - B[k, j]) * W[k, k]
                if d > dmax:
                    dmax = d
                B[k, j] = new
            if dmax < inner_tol:
                break
        for k in range(p):
            if k == j:
                continue
            acc = 0.0
            for l in range(p):
                if l != j:
                    acc += W[k, l] * B[l, j]
            W[k, j] = acc
            W[j, k] = acc


def _theta_from(W, B):
    p = W.shape[0]
    theta = np.empty_like(W)
    for j in range(p):
        b = B[:, j].copy()
        b[j] = 0.0
        t = 1.0 / (W[j, j] - W[j] @ b)
        theta[:, j] = -b * t
        theta[j, j] = t
    return 0.5 * (theta + theta.T)


def _warm_state(theta0, s, tau):
    p = s.shape[0]
    try:
        W = spd_inverse(theta0)
    except NotPositiveDefiniteError:
        return None
    # the sweeps need a dual-feasible start: |W - S| <= tau entrywise
    W = np.clip(W, s - tau, s + tau)
    W[np.diag_indices(p)] = np.diag(s) + tau
    if np.linalg.eigvalsh(W)[0] <= 0:
        return None
    B = -theta0 / np.diag(theta0)[None, :]
    B[np.diag_indices(p)] = 0.0
    return W, np.ascontiguousarray(B)


def glasso_solve(s, tau, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, warm_start=None):
    """Solve the graphical lasso with the diagonal penalized.

    Parameters
    ----------
    s : array_like, shape (p, p)
        Positive semidefinite input matrix; may be singular when ``tau > 0``.
    tau : float
        Nonnegative penalty applied to every entry of ``theta``.
    tol : float
        Target KKT residual.
    max_iter : int
        Maximum number of full column sweeps.
    warm_start : array_like, optional
        Positive definite starting precision.

    Returns
    -------
    GlassoSolution
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    s = _check_problem(s, tau)
    p = s.shape[0]
    if tau == 0:
        if np.any(np.diag(s) <= 0):
            raise UnboundedProblemError(
                "S has a zero diagonal entry and tau = 0: the objective is unbounded below")
        try:
            theta = spd_inverse(s)
        except NotPositiveDefiniteError as exc:
            raise UnboundedProblemError("S is singular and tau = 0") from exc
        return GlassoSolution(theta, kkt_residual(theta, s, 0.0), 0, s.copy())

    state = None
    if warm_start is not None:
        state = _warm_state(symmetrize(warm_start, "warm_start"), s, tau)
    if state is None:
        W = s + tau * np.eye(p)
        B = np.zeros((p, p))
    else:
        W, B = state
    inner_tol = 1e-3 * tol * min(1.0, tau)
    best = (np.inf, None)
    for it in range(1, max_iter + 1):
        _sweep(s, W, B, tau, inner_tol, 10000)
        if not np.all(np.isfinite(W)):
            if state is None:
                raise GlassoConvergenceError("graphical lasso sweep produced non-finite values",
                                             best[1], best[0], it)
            state = None
            W = s + tau * np.eye(p)
            B = np.zeros((p, p))
            continue
        theta = _theta_from(W, B)
        try:
            res = kkt_residual(theta, s, tau)
        except NotPositiveDefiniteError:
            continue
        if res < best[0]:
            best = (res, theta)
        if res <= tol:
            return GlassoSolution(theta, res, it, 0.5 * (W + W.T))
    raise GlassoConvergenceError(
        f"graphical lasso did not reach KKT tolerance {tol:g} in {max_iter} sweeps "
        f"(best residual {best[0]:.3g})", best[1], best[0], max_iter)

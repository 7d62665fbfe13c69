"""Fused-mean update by accelerated alternating minimization (AMA).

For fixed precision factors the class means solve

    min_mu  sum_j pi_j tr{phi (xbar_j - mu_j) delta (xbar_j - mu_j)^T}
            + lambda1 * sum_{j<m} ||w_jm o (mu_j - mu_m)||_1

(up to an additive constant this is the likelihood part plus the fusion
penalty).  The splitting ``theta_jm = mu_j - mu_m`` lets the mean step be
solved in closed form per class and the theta step by soft-thresholding;
the multipliers ``gamma_jm`` get a dual ascent step with Nesterov momentum
(Goldstein et al., 2014) restarted every 200 iterations and whenever the
combined residual grows.

Pair-indexed quantities are stacked along axis 0 in the order
``(0,1), (0,2), ..., (J-2, J-1)``.  Entries of a weight matrix equal to
``np.inf`` are "forced equal": their theta entry is pinned to zero.
"""

from dataclasses import dataclass, field
from itertools import combinations
import warnings

import numpy as np

from .linalg import sym_eigen

RESTART_EVERY = 200


def class_pairs(J):
    return list(combinations(range(J), 2))


def incidence(J):
    """``(P, J)`` matrix with +1 at ``j`` and -1 at ``m`` for each pair ``j < m``."""
    pairs = class_pairs(J)
    E = np.zeros((len(pairs), J))
    for p, (j, m) in enumerate(pairs):
        E[p, j] = 1.0
        E[p, m] = -1.0
    return E


def pairwise_differences(mu):
    """``mu_j - mu_m`` for all pairs, shape ``(P, r, c)``."""
    mu = np.asarray(mu)
    return np.tensordot(incidence(mu.shape[0]), mu, axes=1)


def compute_weights(xbar):
    """Adaptive fusion weights ``1 / |xbar_j - xbar_m|``.

    Where the sample means coincide the weight is ``inf`` (forced equal).
    """
    d = np.abs(pairwise_differences(xbar))
    with np.errstate(divide="ignore"):
        return np.where(d > 0, 1.0 / np.where(d > 0, d, 1.0), np.inf)


def soft_threshold(x, tau):
    """Entrywise ``sign(x) * max(|x| - tau, 0)``; infinite ``tau`` gives 0."""
    x = np.asarray(x, dtype=float)
    tau = np.asarray(tau, dtype=float)
    if np.any(tau < 0):
        raise ValueError("threshold must be nonnegative")
    out = np.sign(x) * np.maximum(np.abs(x) - np.where(np.isinf(tau), 0.0, tau), 0.0)
    return np.where(np.isinf(tau), 0.0, out)


def step_size_bound(phi, delta, pi_hat, J=None):
    """Operational AMA step size: a tenth of the convergence bound.

    ``min_j(pi_j) * 4 * eigmin(phi) * eigmin(delta) / (10 * J)``.
    """
    pi_hat = np.asarray(pi_hat, dtype=float)
    J = pi_hat.size if J is None else J
    k_phi = sym_eigen(phi)[0][-1]
    k_delta = sym_eigen(delta)[0][-1]
    return float(pi_hat.min() * 4.0 * k_phi * k_delta / (10.0 * J))


class MeanProblem:
    """Data of one fused-mean subproblem with the precision inverses cached."""

    def __init__(self, xbar, pi_hat, phi, delta, lambda1, weights):
        self.xbar = np.asarray(xbar, dtype=float)
        self.pi_hat = np.asarray(pi_hat, dtype=float)
        self.phi = np.asarray(phi, dtype=float)
        self.delta = np.asarray(delta, dtype=float)
        self.lambda1 = float(lambda1)
        self.weights = np.asarray(weights, dtype=float)
        J = self.xbar.shape[0]
        if self.lambda1 < 0:
            raise ValueError("lambda1 must be nonnegative")
        if self.weights.shape != (J * (J - 1) // 2,) + self.xbar.shape[1:]:
            raise ValueError("weights must have shape (J(J-1)/2, r, c)")
        if np.any(self.weights < 0) or np.any(np.isnan(self.weights)):
            raise ValueError("weights must be nonnegative")
        self.E = incidence(J)
        self.phi_eig = sym_eigen(self.phi)
        self.delta_eig = sym_eigen(self.delta)
        if self.phi_eig[0][-1] <= 0 or self.delta_eig[0][-1] <= 0:
            raise ValueError("phi and delta must be positive definite")
        self.phi_inv = _inverse_from_eig(*self.phi_eig)
        self.delta_inv = _inverse_from_eig(*self.delta_eig)
        # lambda1 * w / rho, with forced-equal entries kept infinite
        if self.lambda1 == 0:
            self._lw = np.zeros_like(self.weights)
        else:
            self._lw = np.where(np.isinf(self.weights), np.inf, self.lambda1 * self.weights)

    @property
    def n_classes(self):
        return self.xbar.shape[0]

    def step_size(self):
        J = self.n_classes
        k_phi = self.phi_eig[0][-1]
        k_delta = self.delta_eig[0][-1]
        return float(self.pi_hat.min() * 4.0 * k_phi * k_delta / (10.0 * J))

    def objective(self, mu):
        """Fused-mean objective without the data-scatter constant."""
        D = self.xbar - mu
        quad = np.einsum("jab,jab->j", self.phi @ D @ self.delta, D)
        return float(np.sum(self.pi_hat * quad)) + self.penalty(mu)

    def penalty(self, mu):
        if self.lambda1 == 0:
            return 0.0
        diff = pairwise_differences(mu)
        forced = np.isinf(self.weights)
        if np.any(np.abs(diff[forced]) > 0):
            return np.inf
        return self.lambda1 * float(np.sum(np.where(forced, 0.0, self.weights * np.abs(diff))))


def _inverse_from_eig(w, v):
    inv = (v / w) @ v.T
    return 0.5 * (inv + inv.T)


@dataclass
class FusionState:
    """AMA iterates: means ``(J, r, c)``, pair variables ``(P, r, c)``, step ``rho``."""

    mu: np.ndarray
    theta: np.ndarray
    gamma: np.ndarray
    rho: float

    def __post_init__(self):
        if not self.rho > 0:
            raise ValueError("rho must be positive")
        J = self.mu.shape[0]
        P = J * (J - 1) // 2
        if self.theta.shape != (P,) + self.mu.shape[1:] or self.gamma.shape != self.theta.shape:
            raise ValueError("theta and gamma must have shape (J(J-1)/2, r, c)")

    @classmethod
    def cold(cls, prob, rho=None):
        J, r, c = prob.xbar.shape
        P = J * (J - 1) // 2
        rho = prob.step_size() if rho is None else rho
        return cls(prob.xbar.copy(), pairwise_differences(prob.xbar), np.zeros((P, r, c)), rho)


def mu_step(gamma, prob):
    """Closed-form minimizer of the plain Lagrangian over the means.

    ``mu_j = xbar_j + phi^{-1} (sum_{m>j} G_jm - sum_{m<j} G_mj) delta^{-1} / (2 pi_j)``.
    """
    G = np.tensordot(prob.E.T, gamma, axes=1)
    return prob.xbar + (prob.phi_inv @ G @ prob.delta_inv) / (2.0 * prob.pi_hat[:, None, None])


def theta_step(mu, gamma, rho, prob):
    """``soft(mu_j - mu_m - gamma_jm / rho, lambda1 * w_jm / rho)``."""
    diff = np.tensordot(prob.E, mu, axes=1)
    return soft_threshold(diff - gamma / rho, prob._lw / rho)


def gamma_step(gamma, theta, mu, rho, prob):
    """Dual ascent ``gamma + rho * (theta_jm - mu_j + mu_m)``."""
    return gamma + rho * (theta - np.tensordot(prob.E, mu, axes=1))


@dataclass
class AccelConfig:
    tol: float = 1e-7
    max_iter: int = 10000
    restart_every: int = RESTART_EVERY
    adaptive_restart: bool = True
    accelerate: bool = True


@dataclass
class MeanSolveResult:
    mu: np.ndarray
    state: FusionState
    iterations: int
    converged: bool
    primal_residual: float
    dual_change: float
    status: str = "converged"
    residual_trace: list = field(default_factory=list)


def solve_mean_subproblem(prob, init=None, accel=None, rho=None, record=False):
    """Run accelerated AMA on ``prob``.

    Parameters
    ----------
    prob : MeanProblem
    init : FusionState, optional
        Warm start; only its multipliers ``gamma`` are reused.
    accel : AccelConfig, optional
    rho : float, optional
        Step size; defaults to :func:`step_size_bound` of the problem.
    record : bool
        Keep the per-iteration primal residuals.

    Returns
    -------
    MeanSolveResult
        ``status`` is ``"converged"``, ``"max_iter"`` or ``"diverged"``; the
        last two also emit a ``RuntimeWarning``.
    """
    accel = AccelConfig() if accel is None else accel
    rho = prob.step_size() if rho is None else float(rho)
    J, r, c = prob.xbar.shape
    P = J * (J - 1) // 2

    if prob.lambda1 == 0:
        mu = prob.xbar.copy()
        diff = pairwise_differences(mu)
        state = FusionState(mu, diff, np.zeros((P, r, c)), rho)
        return MeanSolveResult(mu, state, 1, True, 0.0, 0.0, residual_trace=[0.0] if record else [])

    gamma = np.zeros((P, r, c)) if init is None else np.array(init.gamma, dtype=float)
    gamma_hat = gamma.copy()
    alpha = 1.0
    last_combined = np.inf
    trace = []
    status = "max_iter"
    res = dchg = np.inf
    mu = theta = None
    it = 0
    since_restart = 0
    for it in range(1, accel.max_iter + 1):
        mu = mu_step(gamma_hat, prob)
        theta = theta_step(mu, gamma_hat, rho, prob)
        diff = np.tensordot(prob.E, mu, axes=1)
        resid = theta - diff
        gamma_new = gamma_hat + rho * resid
        res = float(np.abs(resid).max())
        dchg = float(np.abs(gamma_new - gamma).max()) / max(1.0, float(np.abs(gamma_new).max()))
        if record:
            trace.append(res)
        if not (np.isfinite(res) and np.isfinite(dchg)):
            status = "diverged"
            break
        if res <= accel.tol and dchg <= accel.tol:
            gamma = gamma_new
            status = "converged"
            break
        since_restart += 1
        combined = res + dchg
        restart = since_restart >= accel.restart_every or (
            accel.adaptive_restart and combined > last_combined)
        if not accel.accelerate or restart:
            alpha = 1.0
            gamma_hat = gamma_new
            since_restart = 0 if restart else since_restart
        else:
            alpha_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * alpha * alpha))
            gamma_hat = gamma_new + ((alpha - 1.0) / alpha_new) * (gamma_new - gamma)
            alpha = alpha_new
        last_combined = combined
        gamma = gamma_new

    if status != "converged":
        warnings.warn(f"mean update stopped with status {status!r} after {it} iterations "
                      f"(primal residual {res:.3g})", RuntimeWarning, stacklevel=2)
    state = FusionState(mu, theta, gamma, rho)
    return MeanSolveResult(mu, state, it, status == "converged", res, dchg, status, trace)

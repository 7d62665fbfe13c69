"""Penalized matrix-normal LDA fit by blockwise coordinate descent.

Minimizes

    f(mu, phi, delta) = g(mu, phi, delta)
                        + lambda1 * sum_{j<m} ||w_jm o (mu_j - mu_m)||_1
                        + lambda2 * ||delta||_1 * ||phi||_1

subject to ``||phi||_1 = r``, cycling through the means (accelerated AMA),
``delta`` and ``phi`` (graphical lasso), then rescaling the pair.
"""

from dataclasses import dataclass, field
import logging
import warnings

import numpy as np

from .glasso import DEFAULT_MAX_ITER, GlassoConvergenceError, glasso_solve
from .linalg import l1_norm
from .matnorm import (
    ModelParameters,
    _g_from_scatter,
    class_counts_and_means,
    flipflop_mle,
    s_delta,
    s_phi,
)
from .meansolver import (
    AccelConfig,
    FusionState,
    MeanProblem,
    compute_weights,
    pairwise_differences,
    solve_mean_subproblem,
)

log = logging.getLogger(__name__)


class ForcedEqualityViolation(ValueError):
    pass


@dataclass
class PenaltyConfig:
    """Tuning parameters and solver controls for :func:`fit`."""

    lambda1: float = 0.0
    lambda2: float = 0.0
    epsilon: float = 1e-6
    max_outer_iter: int = 100
    glasso_tol: float = 1e-6
    glasso_max_iter: int = DEFAULT_MAX_ITER
    ama_tol: float = 1e-7
    ama_max_iter: int = 10000
    mean_fuse_threshold: float = 1e-6
    init_tol: float = 1e-3
    init_max_iter: int = 50

    def __post_init__(self):
        if not (self.lambda1 >= 0 and self.lambda2 >= 0):
            raise ValueError("lambda1 and lambda2 must be nonnegative")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.mean_fuse_threshold < 0:
            raise ValueError("mean_fuse_threshold must be nonnegative")

    def accel(self):
        return AccelConfig(tol=self.ama_tol, max_iter=self.ama_max_iter)


@dataclass
class FitResult:
    params: ModelParameters
    objective_trace: list
    outer_iterations: int
    converged: bool
    inner_diagnostics: list = field(default_factory=list)
    gamma: np.ndarray = None
    weights: np.ndarray = None
    config: PenaltyConfig = None

    @property
    def objective(self):
        return self.objective_trace[-1]


def penalized_objective_f(data, mu, phi, delta, cfg, weights=None, fuse_tol=0.0):
    """Penalized criterion ``f``.

    Entries with infinite weight must have equal means (differences up to
    ``fuse_tol`` are treated as equal); otherwise
    :class:`ForcedEqualityViolation` is raised.
    """
    r, c = data.shape
    if weights is None and cfg.lambda1 > 0:
        weights = compute_weights(class_counts_and_means(data)[2])
    g = _g_from_scatter(s_phi(data, mu, delta), phi, delta, r, c)
    return g + _mean_penalty(mu, cfg.lambda1, weights, fuse_tol) \
        + cfg.lambda2 * l1_norm(delta) * l1_norm(phi)


def _mean_penalty(mu, lambda1, weights, fuse_tol=0.0):
    if lambda1 == 0:
        return 0.0
    diff = pairwise_differences(mu)
    forced = np.isinf(weights)
    if np.any(np.abs(diff[forced]) > fuse_tol):
        raise ForcedEqualityViolation("means differ at an entry with infinite weight")
    return lambda1 * float(np.sum(np.where(forced, 0.0, weights * np.abs(diff))))


def normalize_pair(phi_tilde, delta):
    """Rescale so that ``||phi||_1 = r``; ``kron(delta, phi)`` is unchanged."""
    r = phi_tilde.shape[0]
    norm = l1_norm(phi_tilde)
    if norm == 0:
        raise ValueError("phi is zero and cannot be normalized")
    return (r / norm) * phi_tilde, (norm / r) * delta


def fuse_means(mu, pi_hat, threshold, forced=None):
    """Set nearly equal class means exactly equal, entry by entry.

    Classes whose means at an entry are linked by differences of at most
    ``threshold`` (or by a forced-equal weight) get their prior-weighted
    average there.
    """
    mu = np.array(mu, dtype=float)
    J = mu.shape[0]
    if J < 2:
        return mu
    diff = np.abs(pairwise_differences(mu))
    link = diff <= threshold
    if forced is not None:
        link |= forced
    pairs = [(j, m) for j in range(J) for m in range(j + 1, J)]
    # union-find per entry, vectorized over entries: label = smallest reachable class
    label = np.broadcast_to(np.arange(J)[:, None, None], mu.shape).copy()
    for _ in range(J):
        for p, (j, m) in enumerate(pairs):
            lo = np.minimum(label[j], label[m])
            label[j] = np.where(link[p], lo, label[j])
            label[m] = np.where(link[p], lo, label[m])
    out = mu.copy()
    w = np.asarray(pi_hat, dtype=float)[:, None, None]
    for k in range(J):
        members = label == k
        if not np.any(members.sum(axis=0) > 1):
            continue
        tot = np.sum(np.where(members, w, 0.0), axis=0)
        avg = np.sum(np.where(members, w * mu, 0.0), axis=0) / np.where(tot > 0, tot, 1.0)
        out = np.where(members, avg[None], out)
    return out


def initial_precisions(data, cfg):
    """Diagonal of a mildly converged flip-flop MLE, scaled to ``||phi||_1 = r``."""
    ff = flipflop_mle(data, tol=cfg.init_tol, max_iter=cfg.init_max_iter)
    phi0 = np.diag(np.diag(ff.phi))
    delta0 = np.diag(np.diag(ff.delta))
    return normalize_pair(phi0, delta0)


def fit(data, cfg=None, init=None, weights=None):
    """Fit the penalized matrix-normal LDA model.

    Parameters
    ----------
    data : LabeledMatrixDataset
        Training data; every class must be present.
    cfg : PenaltyConfig
    init : FitResult, optional
        Warm start: its ``phi``, ``delta`` and AMA multipliers are reused.
    weights : ndarray, shape (J(J-1)/2, r, c), optional
        Fusion weights; defaults to inverse absolute sample-mean differences.

    Returns
    -------
    FitResult
    """
    cfg = PenaltyConfig() if cfg is None else cfg
    counts, pi_hat, xbar = class_counts_and_means(data)
    J = xbar.shape[0]
    r, c = data.shape
    if weights is None:
        weights = compute_weights(xbar)
    forced = np.isinf(weights) if cfg.lambda1 > 0 else np.zeros(weights.shape, bool)

    if init is None:
        phi, delta = initial_precisions(data, cfg)
        gamma_state = None
    else:
        phi, delta = normalize_pair(init.params.phi, init.params.delta)
        gamma_state = init.gamma

    mu = xbar.copy()

    def f_of(mu_, phi_, delta_, sphi=None):
        if sphi is None:
            sphi = s_phi(data, mu_, delta_)
        return (_g_from_scatter(sphi, phi_, delta_, r, c)
                + _mean_penalty(mu_, cfg.lambda1, weights, fuse_tol=cfg.mean_fuse_threshold)
                + cfg.lambda2 * l1_norm(delta_) * l1_norm(phi_))

    f_cur = f_of(mu, phi, delta)
    f_init = f_cur
    trace = [f_cur]
    diagnostics = []
    converged = False
    it = 0
    for it in range(1, cfg.max_outer_iter + 1):
        diag = {"iteration": it}

        # means
        prob = MeanProblem(xbar, pi_hat, phi, delta, cfg.lambda1, weights)
        init_state = None
        if gamma_state is not None:
            init_state = FusionState(mu, pairwise_differences(mu), gamma_state, prob.step_size())
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            ms = solve_mean_subproblem(prob, init=init_state, accel=cfg.accel())
        diag.update(ama_iterations=ms.iterations, ama_status=ms.status,
                    ama_residual=ms.primal_residual, rho=ms.state.rho)
        mu_new = ms.mu
        if np.any(forced):
            mu_new = fuse_means(mu_new, pi_hat, 0.0, forced)
        if ms.status != "diverged":
            gamma_state = ms.state.gamma
        try:
            f_mu = f_of(mu_new, phi, delta)
        except ForcedEqualityViolation:
            f_mu = np.inf
        if f_mu <= f_cur:
            mu, f_cur = mu_new, f_mu
        else:
            diag["mean_step_rejected"] = True

        # column precision
        sd = s_delta(data, mu, phi)
        tau_d = cfg.lambda2 * l1_norm(phi) / r
        delta_new, gd = _glasso(sd, tau_d, cfg, delta)
        diag.update(delta_glasso_iterations=gd[0], delta_kkt=gd[1])
        f_d = f_of(mu, phi, delta_new)
        if f_d <= f_cur:
            delta, f_cur = delta_new, f_d
        else:
            diag["delta_step_rejected"] = True

        # row precision
        sp = s_phi(data, mu, delta)
        tau_p = cfg.lambda2 * l1_norm(delta) / c
        phi_new, gp = _glasso(sp, tau_p, cfg, phi)
        diag.update(phi_glasso_iterations=gp[0], phi_kkt=gp[1])
        f_p = f_of(mu, phi_new, delta, sphi=sp)
        if f_p <= f_cur:
            phi = phi_new
        else:
            diag["phi_step_rejected"] = True

        phi, delta = normalize_pair(phi, delta)
        f_new = f_of(mu, phi, delta)
        diagnostics.append(diag)
        f_prev = trace[-1]
        trace.append(f_new)
        f_cur = f_new
        log.debug("outer %d: f=%.12g", it, f_new)
        if f_prev - f_new < cfg.epsilon * abs(f_init):
            converged = True
            break

    mu_final = fuse_means(mu, pi_hat, cfg.mean_fuse_threshold, forced)
    params = ModelParameters(pi_hat, mu_final, phi, delta,
                             metadata={"lambda1": cfg.lambda1, "lambda2": cfg.lambda2,
                                       "objective": trace[-1], "iterations": it,
                                       "converged": converged})
    return FitResult(params, trace, it, converged, diagnostics, gamma_state, weights, cfg)


def _glasso(s, tau, cfg, warm):
    try:
        sol = glasso_solve(s, tau, tol=cfg.glasso_tol, max_iter=cfg.glasso_max_iter,
                           warm_start=warm if tau > 0 else None)
        return sol.theta, (sol.iterations, sol.kkt_residual)
    except GlassoConvergenceError as exc:
        if exc.theta is None:
            raise
        log.warning("%s; using best iterate", exc)
        return exc.theta, (exc.iterations, exc.kkt_residual)

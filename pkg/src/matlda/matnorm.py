"""Matrix-normal model pieces: data containers, likelihood, sampling, flip-flop MLE."""

from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    LinAlgFailure,
    NotPositiveDefiniteError,
    cholesky,
    l1_norm,
    logdet_spd,
    spd_inverse,
    symmetrize,
)


class EmptyClassError(ValueError):
    pass


class SingularScatterError(LinAlgFailure):
    pass


@dataclass(frozen=True)
class LabeledMatrixDataset:
    """``n`` observations of ``r x c`` matrices with labels in ``1..n_classes``.

    ``y`` may be ``None`` for unlabeled data (prediction only).
    """

    X: np.ndarray
    y: np.ndarray = None
    n_classes: int = None

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        if X.ndim != 3:
            raise ValueError(f"X must have shape (n, r, c), got {X.shape}")
        if not np.all(np.isfinite(X)):
            raise ValueError("X has non-finite entries")
        X.setflags(write=False)
        object.__setattr__(self, "X", X)
        if self.y is None:
            return
        y = np.asarray(self.y)
        if y.shape != (X.shape[0],):
            raise ValueError(f"y must have shape ({X.shape[0]},), got {y.shape}")
        if not np.issubdtype(y.dtype, np.integer):
            if not np.all(y == np.round(y)):
                raise ValueError("labels must be integers")
        y = y.astype(np.int64)
        J = int(y.max()) if self.n_classes is None and y.size else self.n_classes
        if J is None:
            J = 0
        if y.size and (y.min() < 1 or y.max() > J):
            raise ValueError(f"labels must lie in 1..{J}")
        y.setflags(write=False)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "n_classes", int(J))

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def shape(self):
        return self.X.shape[1:]

    @property
    def labeled(self):
        return self.y is not None

    def subset(self, idx):
        idx = np.asarray(idx)
        y = None if self.y is None else self.y[idx]
        return LabeledMatrixDataset(self.X[idx], y, self.n_classes)


@dataclass
class ModelParameters:
    """Priors, class mean matrices and Kronecker precision factors.

    ``means`` has shape ``(J, r, c)``; ``phi`` is the ``r x r`` row precision and
    ``delta`` the ``c x c`` column precision, so ``vec(X) | Y=j`` has precision
    ``kron(delta, phi)``.
    """

    priors: np.ndarray
    means: np.ndarray
    phi: np.ndarray
    delta: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.priors = np.asarray(self.priors, dtype=float)
        self.means = np.asarray(self.means, dtype=float)
        self.phi = symmetrize(self.phi, "phi")
        self.delta = symmetrize(self.delta, "delta")
        J, r, c = self.means.shape
        if self.priors.shape != (J,):
            raise ValueError("priors and means disagree on the number of classes")
        if self.phi.shape != (r, r) or self.delta.shape != (c, c):
            raise ValueError("precision factors do not match the mean dimensions")
        if np.any(self.priors <= 0) or abs(self.priors.sum() - 1.0) > 1e-12:
            raise ValueError("priors must be positive and sum to one")

    @property
    def n_classes(self):
        return self.means.shape[0]

    @property
    def shape(self):
        return self.means.shape[1:]

    def normalized(self):
        """Copy rescaled so that ``l1_norm(phi) == r``; the likelihood is unchanged."""
        r = self.phi.shape[0]
        s = r / l1_norm(self.phi)
        return ModelParameters(self.priors, self.means, s * self.phi, self.delta / s,
                               dict(self.metadata))


def class_counts_and_means(data):
    """Class sizes, empirical priors ``n_j / n`` and sample mean matrices.

    Returns
    -------
    counts : ndarray of int, shape (J,)
    pi_hat : ndarray, shape (J,)
    xbar : ndarray, shape (J, r, c)
    """
    if not data.labeled:
        raise ValueError("dataset has no labels")
    J = data.n_classes
    counts = np.bincount(data.y - 1, minlength=J)
    for j in np.flatnonzero(counts == 0):
        raise EmptyClassError(f"class {j + 1} has no observations")
    xbar = np.stack([data.X[data.y == j + 1].mean(axis=0) for j in range(J)])
    return counts, counts / data.n, xbar


def residuals(data, mu):
    """``x_i - mu_{y_i}`` for every observation, shape ``(n, r, c)``."""
    return data.X - np.asarray(mu)[data.y - 1]


def s_phi(data, mu, delta):
    """Row scatter ``(1/(n c)) sum_i R_i delta R_i^T``."""
    R = residuals(data, mu)
    r, c = data.shape
    S = np.einsum("iab,bd,ied->ae", R, delta, R, optimize=True) / (data.n * c)
    return 0.5 * (S + S.T)


def s_delta(data, mu, phi):
    """Column scatter ``(1/(n r)) sum_i R_i^T phi R_i``."""
    R = residuals(data, mu)
    r, c = data.shape
    S = np.einsum("iab,ad,ide->be", R, phi, R, optimize=True) / (data.n * r)
    return 0.5 * (S + S.T)


def neg_loglik_g(data, mu, phi, delta):
    """Negative log-likelihood criterion without constants.

    ``(1/n) sum_i tr{phi (x_i - mu_j) delta (x_i - mu_j)^T} - c log det phi
    - r log det delta``.
    """
    phi = symmetrize(phi, "phi")
    delta = symmetrize(delta, "delta")
    r, c = data.shape
    return _g_from_scatter(s_phi(data, mu, delta), phi, delta, r, c)


def _g_from_scatter(sphi, phi, delta, r, c):
    return (c * float(np.sum(phi * sphi))
            - c * logdet_spd(phi) - r * logdet_spd(delta))


def sample_matrix_normal(mean, rng, size=None, *, phi=None, delta=None, sigma=None):
    """Draw matrix-normal samples.

    Give either the precision factors ``phi`` (rows) and ``delta`` (columns),
    or the full ``rc x rc`` covariance ``sigma`` of ``vec(X)``.  Both routes
    consume the generator identically (``rc`` standard normals per draw, in
    column-major order), and ``chol(delta^-1) (x) chol(phi^-1)`` is itself the
    Cholesky factor of the Kronecker covariance, so the two routes give the
    same draws up to rounding.

    Returns an array of shape ``(r, c)`` when ``size`` is None, otherwise
    ``(size, r, c)``.
    """
    mean = np.asarray(mean, dtype=float)
    r, c = mean.shape
    m = 1 if size is None else int(size)
    z = rng.standard_normal((m, r * c))
    if sigma is not None:
        if phi is not None or delta is not None:
            raise ValueError("give either sigma or (phi, delta), not both")
        low = cholesky(sigma)
        if low.shape != (r * c, r * c):
            raise ValueError("sigma does not match the mean dimensions")
        draws = (z @ low.T).reshape((m, c, r)).transpose(0, 2, 1)
    else:
        if phi is None or delta is None:
            raise ValueError("need both phi and delta")
        a = cholesky(spd_inverse(phi))
        b = cholesky(spd_inverse(delta))
        Z = z.reshape((m, c, r)).transpose(0, 2, 1)
        draws = a @ Z @ b.T
    draws = draws + mean
    return draws[0] if size is None else draws


def sample_from_params(params, labels, rng, sigma=None):
    """Features for the given 1-based ``labels`` under ``params``.

    When ``sigma`` is given it replaces the Kronecker covariance.
    """
    labels = np.asarray(labels)
    zero = np.zeros(params.shape)
    if sigma is None:
        noise = sample_matrix_normal(zero, rng, labels.size, phi=params.phi, delta=params.delta)
    else:
        noise = sample_matrix_normal(zero, rng, labels.size, sigma=sigma)
    return params.means[labels - 1] + noise


@dataclass
class FlipFlopResult:
    phi: np.ndarray
    delta: np.ndarray
    mu: np.ndarray
    objective_trace: list
    iterations: int
    converged: bool


def flipflop_mle(data, tol=1e-3, max_iter=50):
    """Matrix-normal maximum likelihood by alternating closed-form updates.

    The means are fixed at the class sample means; ``phi`` and ``delta`` are
    updated as inverses of the row and column scatter matrices until the
    relative change in ``g`` drops below ``tol``.  The returned pair is scaled
    so that ``l1_norm(phi) == r``.
    """
    r, c = data.shape
    if data.n * c <= r or data.n * r <= c:
        raise SingularScatterError(
            f"scatter matrices are singular with n={data.n}, r={r}, c={c}; "
            "use a ridge penalty or more data")
    _, _, xbar = class_counts_and_means(data)
    delta = np.eye(c)
    phi = np.eye(r)
    trace = []
    g_old = None
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        try:
            phi = spd_inverse(s_phi(data, xbar, delta))
            delta = spd_inverse(s_delta(data, xbar, phi))
        except NotPositiveDefiniteError as exc:
            raise SingularScatterError(
                "scatter matrix is singular; use a ridge penalty or more data") from exc
        s = r / l1_norm(phi)
        phi, delta = s * phi, delta / s
        g = neg_loglik_g(data, xbar, phi, delta)
        trace.append(g)
        if g_old is not None and abs(g_old - g) <= tol * max(abs(g), 1e-300):
            converged = True
            break
        g_old = g
    return FlipFlopResult(phi, delta, xbar, trace, it, converged)

"""Three-class simulation designs with four covariance models.

The class means are zero except on one 4 x 4 block, placed at a random
offset, where they follow ``mean_pattern``.  Covariance models:

1. ``Sigma = col_cov (x) row_cov`` with AR(1) rows (0.7) and compound
   symmetric columns (0.7).
2. AR(1) rows; columns correlated at 0.7 only among the columns where the
   class means differ, independent otherwise (block diagonal).
3. Non-separable: ``Cov(X_ab, X_cd) = {0.5 + 0.5 1(b=d)} (rho_b rho_d)^|a-c|
   / (1 - rho_b rho_d)`` with ``rho`` equally spaced on [0.5, 0.9].
4. Unit variances; correlation 0.5 among all coordinates where the class
   means differ, zero elsewhere.

``vec`` is column-major throughout, so ``Sigma = kron(col_cov, row_cov)``.
"""

from dataclasses import dataclass, field

import numpy as np

from .linalg import min_eigenvalue, spd_inverse
from .matnorm import LabeledMatrixDataset, ModelParameters, sample_matrix_normal

MODEL3_DIMS = {(8, 8), (16, 16), (32, 32), (64, 64), (32, 8), (32, 16), (32, 64)}
N_CLASSES = 3
BLOCK = 4


def default_mean_pattern():
    """Class 1 zero, class 2 0.5 on the diagonal, class 3 1.0 on the anti-diagonal."""
    pat = np.zeros((N_CLASSES, BLOCK, BLOCK))
    pat[1] = 0.5 * np.eye(BLOCK)
    pat[2] = np.fliplr(np.eye(BLOCK))
    return pat


@dataclass
class SimulationSpec:
    model: int
    r: int
    c: int
    n_train: int = 75
    n_validate: int = 75
    n_test: int = 1000
    mean_pattern: np.ndarray = field(default_factory=default_mean_pattern)
    seed: int = 0

    def __post_init__(self):
        if self.model not in (1, 2, 3, 4):
            raise ValueError(f"model must be 1, 2, 3 or 4, got {self.model}")
        if self.r < BLOCK or self.c < BLOCK:
            raise ValueError(f"r and c must be at least {BLOCK}")
        if self.model == 3 and (self.r, self.c) not in MODEL3_DIMS:
            raise ValueError(
                "model 3 is only positive definite for r = c in {8, 16, 32, 64} "
                f"or r = 32 with c in {{8, 16, 32, 64}}; got r={self.r}, c={self.c}")
        self.mean_pattern = np.asarray(self.mean_pattern, dtype=float)
        if self.mean_pattern.shape != (N_CLASSES, BLOCK, BLOCK):
            raise ValueError("mean_pattern must have shape (3, 4, 4)")


@dataclass
class Covariance:
    """Either Kronecker factors (models 1-2) or a full matrix (models 3-4)."""

    row_cov: np.ndarray = None
    col_cov: np.ndarray = None
    sigma: np.ndarray = None

    @property
    def kronecker(self):
        return self.sigma is None

    def full(self):
        if self.sigma is not None:
            return self.sigma
        return np.kron(self.col_cov, self.row_cov)


@dataclass
class GeneratedReplicate:
    train: LabeledMatrixDataset
    validate: LabeledMatrixDataset
    test: LabeledMatrixDataset
    means: np.ndarray
    covariance: Covariance
    block_position: tuple
    true_params: ModelParameters = None


def build_means(spec, rng=None):
    """Class mean matrices and the block offset ``(row, col)``."""
    rng = np.random.default_rng(spec.seed) if rng is None else rng
    row = int(rng.integers(0, spec.r - BLOCK + 1))
    col = int(rng.integers(0, spec.c - BLOCK + 1))
    means = np.zeros((N_CLASSES, spec.r, spec.c))
    means[:, row:row + BLOCK, col:col + BLOCK] = spec.mean_pattern
    return means, (row, col)


def differing_entries(means):
    """Boolean ``(r, c)`` mask of entries where some pair of class means differ."""
    means = np.asarray(means)
    return np.any(means != means[0], axis=0)


def ar1(d, rho):
    idx = np.arange(d)
    return rho ** np.abs(idx[:, None] - idx[None, :])


def model3_covariance(r, rhos):
    """Full covariance of model 3 for column-specific AR coefficients ``rhos``."""
    rhos = np.asarray(rhos, dtype=float)
    c = rhos.size
    a = np.arange(r)
    lag = np.abs(a[:, None] - a[None, :])
    sigma = np.empty((r * c, r * c))
    for b in range(c):
        for d in range(c):
            pr = rhos[b] * rhos[d]
            scale = 1.0 if b == d else 0.5
            sigma[b * r:(b + 1) * r, d * r:(d + 1) * r] = scale * pr ** lag / (1.0 - pr)
    return sigma


def build_covariance(spec, means):
    r, c = spec.r, spec.c
    active = differing_entries(means)
    if spec.model == 1:
        col = np.full((c, c), 0.7)
        np.fill_diagonal(col, 1.0)
        cov = Covariance(row_cov=ar1(r, 0.7), col_cov=col)
    elif spec.model == 2:
        on = active.any(axis=0)
        col = np.where(on[:, None] & on[None, :], 0.7, 0.0)
        np.fill_diagonal(col, 1.0)
        cov = Covariance(row_cov=ar1(r, 0.7), col_cov=col)
    elif spec.model == 3:
        cov = Covariance(sigma=model3_covariance(r, np.linspace(0.5, 0.9, c)))
    else:
        on = active.reshape(-1, order="F")
        sigma = np.where(on[:, None] & on[None, :], 0.5, 0.0)
        np.fill_diagonal(sigma, 1.0)
        cov = Covariance(sigma=sigma)
    mats = [cov.sigma] if cov.sigma is not None else [cov.row_cov, cov.col_cov]
    for m in mats:
        lo = min_eigenvalue(m)
        if lo <= 0:
            raise ValueError(f"model {spec.model} covariance is not positive definite "
                             f"(min eigenvalue {lo:.3g})")
    return cov


def generate_replicate(spec):
    """Draw train/validate/test sets for one replicate, reproducibly from ``spec.seed``."""
    rng = np.random.default_rng(spec.seed)
    means, pos = build_means(spec, rng)
    cov = build_covariance(spec, means)
    priors = np.full(N_CLASSES, 1.0 / N_CLASSES)
    true_params = None
    if cov.kronecker:
        true_params = ModelParameters(priors, means, spd_inverse(cov.row_cov),
                                      spd_inverse(cov.col_cov)).normalized()
    sizes = [spec.n_train, spec.n_validate, spec.n_test]
    n = sum(sizes)
    y = rng.integers(1, N_CLASSES + 1, size=n)
    zero = np.zeros((spec.r, spec.c))
    if cov.kronecker:
        noise = sample_matrix_normal(zero, rng, n, phi=true_params.phi, delta=true_params.delta)
    else:
        noise = sample_matrix_normal(zero, rng, n, sigma=cov.sigma)
    X = means[y - 1] + noise
    cuts = np.cumsum(sizes)[:-1]
    parts = [LabeledMatrixDataset(Xp, yp, N_CLASSES)
             for Xp, yp in zip(np.split(X, cuts), np.split(y, cuts))]
    return GeneratedReplicate(*parts, means=means, covariance=cov, block_position=pos,
                              true_params=true_params)

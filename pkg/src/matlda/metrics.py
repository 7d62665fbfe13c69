"""Misclassification rate and support recovery of mean differences."""

from dataclasses import dataclass

import numpy as np

from .linalg import vec

DEFAULT_ZERO_TOL = 1e-8


def misclassification_rate(predictions, truth):
    predictions = np.asarray(predictions)
    truth = np.asarray(truth)
    if predictions.shape != truth.shape:
        raise ValueError("predictions and truth have different lengths")
    if predictions.size == 0:
        raise ValueError("cannot compute an error rate on an empty set")
    return float(np.mean(predictions != truth))


def difference_matrix(mu):
    """Columns ``vec(mu_1 - mu_2), ..., vec(mu_{J-1} - mu_J)``, shape ``(rc, J-1)``."""
    mu = np.asarray(mu, dtype=float)
    return np.stack([vec(mu[k] - mu[k + 1]) for k in range(mu.shape[0] - 1)], axis=1)


@dataclass
class SupportRecovery:
    """True positive/negative rates; ``None`` when the denominator is empty."""

    tpr: float
    tnr: float
    d_hat_support: np.ndarray
    d_star_support: np.ndarray


def support_metrics(mu_hat, mu_star, zero_tol=DEFAULT_ZERO_TOL):
    """TPR and TNR of the estimated nonzero mean differences.

    Only consecutive class pairs are compared; entries with ``|d| <= zero_tol``
    count as zero.
    """
    mu_hat = np.asarray(mu_hat, dtype=float)
    mu_star = np.asarray(mu_star, dtype=float)
    if mu_hat.shape != mu_star.shape:
        raise ValueError("mu_hat and mu_star must have the same shape")
    hat = np.abs(difference_matrix(mu_hat)) > zero_tol
    star = np.abs(difference_matrix(mu_star)) > zero_tol
    n_pos = int(star.sum())
    n_neg = star.size - n_pos
    tpr = float(np.sum(hat & star)) / n_pos if n_pos else None
    tnr = float(np.sum(~hat & ~star)) / n_neg if n_neg else None
    return SupportRecovery(tpr, tnr, hat, star)

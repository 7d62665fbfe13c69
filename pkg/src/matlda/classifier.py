"""Plug-in linear discriminant rule for matrix-normal class models."""

from dataclasses import dataclass

import numpy as np


@dataclass
class DiscriminantScores:
    scores: np.ndarray
    predicted: int


def _check_dims(X, params):
    X = np.asarray(X, dtype=float)
    if X.shape[-2:] != params.shape:
        raise ValueError(f"observation shape {X.shape[-2:]} does not match model shape "
                         f"{params.shape}")
    return X


def score_batch(X, params):
    """Discriminant scores, shape ``(n, J)``.

    ``log pi_j - tr{phi (x - mu_j) delta (x - mu_j)^T} / 2``; class-free
    terms of the log-density are dropped.
    """
    X = _check_dims(X, params)
    if X.ndim == 2:
        X = X[None]
    R = X[:, None] - params.means[None]
    quad = np.einsum("njab,njab->nj", params.phi @ R @ params.delta, R)
    return np.log(params.priors)[None, :] - 0.5 * quad


def score(x, params):
    s = score_batch(np.asarray(x)[None], params)[0]
    # argmax returns the first maximum, i.e. the smallest class index on ties
    return DiscriminantScores(s, int(np.argmax(s)) + 1)


def predict_batch(X, params):
    """Predicted 1-based labels for a batch of matrices."""
    X = np.asarray(X, dtype=float)
    if X.size == 0 and X.ndim < 3:
        return np.zeros(0, dtype=np.int64)
    if X.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    return np.argmax(score_batch(X, params), axis=1).astype(np.int64) + 1

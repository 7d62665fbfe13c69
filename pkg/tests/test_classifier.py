import numpy as np
import pytest
from hypothesis import given, strategies as st

from matlda.classifier import predict_batch, score, score_batch
from matlda.matnorm import ModelParameters
from matlda.simulation import SimulationSpec, generate_replicate
from oracles import discriminant_vec_form, random_spd, vec


def random_params(rng, J=3, r=3, c=2, spread=1.0):
    return ModelParameters(rng.dirichlet(np.ones(J)), spread * rng.standard_normal((J, r, c)),
                           random_spd(rng, r), random_spd(rng, c))


def test_nearest_mean_wins():
    mu = np.zeros((2, 2, 2))
    mu[1] = 100
    p = ModelParameters([0.5, 0.5], mu, np.eye(2), np.eye(2))
    assert score(mu[0], p).predicted == 1


def test_prior_dominates_equal_means():
    rng = np.random.default_rng(0)
    p = ModelParameters([0.9, 0.1], np.zeros((2, 2, 2)), np.eye(2), np.eye(2))
    assert np.all(predict_batch(rng.standard_normal((50, 2, 2)), p) == 1)


def test_tie_goes_to_smallest_index():
    p = ModelParameters([0.5, 0.5], np.zeros((2, 1, 1)), np.eye(1), np.eye(1))
    assert score(np.zeros((1, 1)), p).predicted == 1


@pytest.mark.parametrize("seed", range(10))
def test_scores_match_vec_form(seed):
    rng = np.random.default_rng(seed)
    p = random_params(rng, r=int(rng.integers(1, 6)), c=int(rng.integers(1, 6)))
    x = rng.standard_normal(p.shape)
    ref = discriminant_vec_form(x, p.priors, p.means, p.phi, p.delta)
    np.testing.assert_allclose(score(x, p).scores, ref, rtol=1e-9)


def test_empty_batch():
    p = random_params(np.random.default_rng(1))
    assert predict_batch(np.zeros((0, 3, 2)), p).size == 0


def test_batch_at_class_means():
    p = random_params(np.random.default_rng(2), spread=50.0)
    np.testing.assert_array_equal(predict_batch(p.means, p), [1, 2, 3])


def test_shape_mismatch():
    p = random_params(np.random.default_rng(3))
    with pytest.raises(ValueError):
        score_batch(np.zeros((4, 2, 3)), p)


@given(st.integers(0, 10_000), st.floats(1e-3, 1e3))
def test_rescaling_keeps_predictions(seed, t):
    rng = np.random.default_rng(seed)
    p = random_params(rng)
    q = ModelParameters(p.priors, p.means, p.phi / t, t * p.delta)
    X = rng.standard_normal((20, 3, 2))
    assert np.array_equal(predict_batch(X, p), predict_batch(X, q))


@given(st.integers(0, 10_000))
def test_translation_equivariance(seed):
    rng = np.random.default_rng(seed)
    p = random_params(rng)
    C = rng.standard_normal(p.shape)
    q = ModelParameters(p.priors, p.means + C, p.phi, p.delta)
    X = rng.standard_normal((20, 3, 2))
    a, b = score_batch(X, p), score_batch(X + C, q)
    np.testing.assert_allclose(a - a[:, :1], b - b[:, :1], atol=1e-9)
    assert np.array_equal(predict_batch(X, p), predict_batch(X + C, q))


def test_bayes_rule_error_matches_monte_carlo():
    rep = generate_replicate(SimulationSpec(1, 4, 4, n_test=2000, seed=21))
    p = rep.true_params
    err = np.mean(predict_batch(rep.test.X, p) != rep.test.y)
    # independent rule on a large fresh sample, built from the full covariance
    rng = np.random.default_rng(99)
    sigma = rep.covariance.full()
    K = np.linalg.inv(sigma)
    m = 200_000
    y = rng.integers(0, 3, m)
    Z = rng.multivariate_normal(np.zeros(16), sigma, m)
    V = np.stack([vec(mu) for mu in rep.means])
    Xv = V[y] + Z
    q = np.einsum("nja,ab,njb->nj", Xv[:, None] - V[None], K, Xv[:, None] - V[None])
    bayes = np.mean(np.argmin(q, axis=1) != y)
    assert abs(err - bayes) <= 0.02

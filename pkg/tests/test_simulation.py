import numpy as np
import pytest

from matlda.linalg import spd_inverse
from matlda.matnorm import sample_matrix_normal
from matlda.simulation import (MODEL3_DIMS, SimulationSpec, ar1, build_covariance, build_means,
                               default_mean_pattern, differing_entries, generate_replicate,
                               model3_covariance)


def test_small_dims_force_offset():
    _, pos = build_means(SimulationSpec(1, 4, 4))
    assert pos == (0, 0)


def test_zero_pattern():
    means, _ = build_means(SimulationSpec(1, 8, 8, mean_pattern=np.zeros((3, 4, 4))))
    assert not means.any()


@pytest.mark.parametrize("seed", range(100))
def test_means_confined_to_block(seed):
    spec = SimulationSpec(1, 10, 7, seed=seed)
    means, (a, b) = build_means(spec)
    outside = np.ones((10, 7), bool)
    outside[a:a + 4, b:b + 4] = False
    assert not means[:, outside].any()
    np.testing.assert_array_equal(means[:, a:a + 4, b:b + 4], default_mean_pattern())


def test_model1_factors():
    cov = build_covariance(SimulationSpec(1, 4, 5), np.zeros((3, 4, 5)))
    np.testing.assert_allclose(cov.row_cov[:2, :2], [[1, 0.7], [0.7, 1]])
    np.testing.assert_allclose(cov.row_cov[0, 3], 0.7 ** 3)
    assert np.all(cov.col_cov[~np.eye(5, dtype=bool)] == 0.7)
    assert np.all(np.diag(cov.col_cov) == 1)


def test_model2_block_structure():
    spec = SimulationSpec(2, 8, 8, seed=3)
    means, (_, b) = build_means(spec)
    cov = build_covariance(spec, means)
    on = np.zeros(8, bool)
    on[b:b + 4] = True
    off = cov.col_cov[~np.eye(8, dtype=bool)]
    assert set(np.unique(off)) <= {0.0, 0.7}
    np.testing.assert_array_equal(cov.col_cov > 0, (on[:, None] & on[None]) | np.eye(8, dtype=bool))
    assert np.linalg.eigvalsh(cov.col_cov)[0] > 0


def test_model3_dimension_restriction():
    with pytest.raises(ValueError, match="model 3"):
        SimulationSpec(3, 16, 64)
    for r, c in MODEL3_DIMS:
        SimulationSpec(3, r, c)


def test_model3_equal_rho_factorizes():
    rho = 0.6
    sigma = model3_covariance(5, np.full(4, rho))
    col = np.full((4, 4), 0.5) + 0.5 * np.eye(4)
    np.testing.assert_allclose(sigma, np.kron(col, ar1(5, rho ** 2) / (1 - rho ** 2)),
                               rtol=1e-13)


def test_model3_rho_spacing():
    spec = SimulationSpec(3, 8, 8)
    cov = build_covariance(spec, build_means(spec)[0])
    rhos = np.linspace(0.5, 0.9, 8)
    # diagonal blocks have variance 1 / (1 - rho_b^2)
    np.testing.assert_allclose(np.diag(cov.sigma)[::8], 1 / (1 - rhos ** 2))


def test_model4_structure():
    spec = SimulationSpec(4, 8, 8, seed=1)
    means, _ = build_means(spec)
    sigma = build_covariance(spec, means).sigma
    assert np.all(np.diag(sigma) == 1)
    on = differing_entries(means).reshape(-1, order="F")
    off = ~np.eye(64, dtype=bool)
    np.testing.assert_array_equal(sigma[off] == 0.5, (on[:, None] & on[None])[off])


def test_replicate_sizes_and_reproducibility():
    spec = SimulationSpec(1, 8, 8, seed=7)
    a, b = generate_replicate(spec), generate_replicate(spec)
    assert (a.train.n, a.validate.n, a.test.n) == (75, 75, 1000)
    assert np.array_equal(a.train.X, b.train.X) and np.array_equal(a.test.y, b.test.y)
    assert a.block_position == b.block_position
    freq = np.bincount(a.test.y, minlength=4)[1:] / 1000
    assert np.all(np.abs(freq - 1 / 3) <= 0.05)


@pytest.mark.parametrize("model", [3, 4])
def test_nonseparable_models_have_no_kronecker_truth(model):
    rep = generate_replicate(SimulationSpec(model, 8, 8, n_test=10))
    assert rep.true_params is None and rep.covariance.sigma.shape == (64, 64)


def test_model1_kronecker_matches_full_sampling():
    spec = SimulationSpec(1, 4, 4)
    cov = build_covariance(spec, build_means(spec)[0])
    rng = np.random.default_rng(0)
    kron = sample_matrix_normal(np.zeros((4, 4)), rng, 100_000, phi=spd_inverse(cov.row_cov),
                                delta=spd_inverse(cov.col_cov))
    full = sample_matrix_normal(np.zeros((4, 4)), np.random.default_rng(1), 100_000,
                                sigma=cov.full())
    ca = np.cov(kron.reshape(len(kron), -1, order="F"), rowvar=False)
    cb = np.cov(full.reshape(len(full), -1, order="F"), rowvar=False)
    assert np.abs(ca - cb).max() < 0.05


def test_spec_validation():
    with pytest.raises(ValueError):
        SimulationSpec(5, 8, 8)
    with pytest.raises(ValueError):
        SimulationSpec(1, 3, 8)
    with pytest.raises(ValueError):
        SimulationSpec(1, 8, 8, mean_pattern=np.zeros((2, 4, 4)))

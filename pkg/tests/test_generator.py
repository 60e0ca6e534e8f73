import numpy as np
import pytest
from scipy import stats

from hnsm.generator import (
    BlockSpec,
    GeneratorConfig,
    canonical_config,
    sample_network,
)
from hnsm.hfunctions import HFunctionSpec

POS = HFunctionSpec("gamma-recipe", 0.5, "positive")
NEG = HFunctionSpec("gamma-recipe", 0.5, "negative")


def one_block_config(n_r, n_c, sigma=0.0, h=POS, seed=0):
    return GeneratorConfig(
        (n_r,),
        (n_c,),
        ((BlockSpec(0.0, 1.0, h, sigma),),),
        psi_mode="iid-uniform",
        psi_seed=seed,
        noise_seed=seed + 1,
    )


def test_canonical_dimensions():
    cfg = canonical_config()
    m, truth, psi_row, psi_col = sample_network(cfg)
    assert m.shape == (292, 219)
    assert m.density == 1.0
    assert truth.k_rows == 4 and truth.k_cols == 3
    assert psi_row.shape == (292, 3)
    assert psi_col.shape == (219, 4)


def test_canonical_is_deterministic():
    a, _, _, _ = sample_network(canonical_config())
    b, _, _, _ = sample_network(canonical_config())
    np.testing.assert_array_equal(a.weights, b.weights)


def test_weights_respect_block_range():
    m, _, _, _ = sample_network(canonical_config())
    labels_r = np.repeat(np.arange(1, 5), 73)
    labels_c = np.repeat(np.arange(1, 4), 73)
    for i in range(1, 5):
        for j in range(1, 4):
            block = m.weights[np.ix_(labels_r == i, labels_c == j)]
            hi = 200.0 if i == j else (100.0 if abs(i - j) == 1 else 50.0)
            assert block.min() >= 0.0
            assert block.max() <= hi


def test_sigma_zero_ignores_noise_seed():
    cfg_a = one_block_config(30, 30, sigma=0.0, seed=5)
    cfg_b = GeneratorConfig(
        cfg_a.row_sizes, cfg_a.col_sizes, cfg_a.blocks,
        psi_mode="iid-uniform", psi_seed=5, noise_seed=999,
    )
    a, _, _, _ = sample_network(cfg_a)
    b, _, _, _ = sample_network(cfg_b)
    np.testing.assert_array_equal(a.weights, b.weights)


def test_noise_changes_output():
    a, _, _, _ = sample_network(one_block_config(30, 30, sigma=1.0, seed=5))
    cfg = one_block_config(30, 30, sigma=1.0, seed=5)
    cfg_b = GeneratorConfig(
        cfg.row_sizes, cfg.col_sizes, cfg.blocks,
        psi_mode="iid-uniform", psi_seed=5, noise_seed=999,
    )
    b, _, _, _ = sample_network(cfg_b)
    assert (a.weights != b.weights).any()


@pytest.mark.parametrize("sigma", [0.0, 0.5, 2.0])
@pytest.mark.parametrize("h", [POS, NEG])
def test_marginal_uniformity_iid_psi(sigma, h):
    # quick version of the marginal check; full-scale run is in acceptance.
    # edges within one network share psi values, so pool several
    # independent networks to beat down the shared-psi fluctuation
    pool = [
        sample_network(one_block_config(50, 50, sigma=sigma, h=h, seed=s))[
            0
        ].weights.ravel()
        for s in range(0, 40, 2)
    ]
    d = stats.kstest(np.concatenate(pool), "uniform").statistic
    assert d < 0.05


def test_config_validation():
    with pytest.raises(ValueError):
        BlockSpec(1.0, 0.5, POS)
    with pytest.raises(ValueError):
        BlockSpec(0.0, 1.0, POS, sigma=-1.0)
    with pytest.raises(ValueError):
        GeneratorConfig((5,), (5,), ((BlockSpec(0, 1, POS),),), psi_mode="grid")
    with pytest.raises(ValueError):
        GeneratorConfig(
            (5, 5), (5,), ((BlockSpec(0, 1, POS),),)  # blocks not 2x1
        )


def test_equally_spaced_psi_layout():
    cfg = GeneratorConfig(
        (4,), (3,), ((BlockSpec(0, 1, POS),),),
        psi_lo=0.1, psi_hi=0.9,
    )
    _, _, psi_row, psi_col = sample_network(cfg)
    np.testing.assert_allclose(psi_row[:, 0], np.linspace(0.1, 0.9, 4))
    np.testing.assert_allclose(psi_col[:, 0], np.linspace(0.1, 0.9, 3))

import numpy as np
import pytest

from hnsm.data import CommunityAssignment, RatingsMatrix
from hnsm.measure import (
    local_degree,
    measure_L,
    measure_value,
    node_community_correlation,
)

from oracles import naive_measure


def random_case(rng, max_n=10, max_m=10, p_obs=0.75):
    n = rng.integers(4, max_n + 1)
    m = rng.integers(4, max_m + 1)
    W = rng.uniform(0, 50, size=(n, m))
    M = rng.random((n, m)) < p_obs
    rl = rng.integers(1, rng.integers(2, 4), size=n, endpoint=True)
    cl = rng.integers(1, rng.integers(2, 4), size=m, endpoint=True)
    return W, M, rl, cl


def test_matches_naive_transcription():
    rng = np.random.default_rng(123)
    for _ in range(20):
        W, M, rl, cl = random_case(rng)
        fast = measure_value(W, M, rl, cl)
        slow = naive_measure(W, M, rl, cl)
        assert fast == pytest.approx(slow, abs=1e-9)


def test_fully_missing_is_zero():
    W = np.zeros((5, 5))
    M = np.zeros((5, 5), dtype=bool)
    assert measure_value(W, M, np.ones(5, int), np.ones(5, int)) == 0.0


def test_perfect_rank_one_block():
    # rank-one positive block: every correlation is exactly 1, sd 0
    psi_r = np.linspace(1, 2, 6)
    psi_c = np.linspace(1, 3, 5)
    W = np.outer(psi_r, psi_c)
    M = np.ones_like(W, dtype=bool)
    m = RatingsMatrix(W, M)
    ca = CommunityAssignment(np.ones(6, int), np.ones(5, int))
    bd = measure_L(m, ca)
    assert bd.mean_corr_rows[0, 0] == pytest.approx(1.0)
    assert bd.mean_corr_cols[0, 0] == pytest.approx(1.0)
    assert bd.sd_corr_rows[0, 0] == pytest.approx(0.0, abs=1e-7)
    # contribution = (1 + 1) * (6-2) * (5-2) * 1
    assert bd.total == pytest.approx(2.0 * 4 * 3, rel=1e-6)


def test_small_communities_contribute_zero():
    # max(n - 2, 0) kills communities of size <= 2
    rng = np.random.default_rng(7)
    W = rng.uniform(0, 10, (4, 6))
    M = np.ones_like(W, dtype=bool)
    rl = np.array([1, 1, 2, 2])  # both row communities have size 2
    cl = np.ones(6, int)
    assert measure_value(W, M, rl, cl) == 0.0


def test_shift_invariance_fully_observed():
    # with missing entries the local degrees are not shift-equivariant, so
    # this only holds for complete matrices
    rng = np.random.default_rng(5)
    W, M, rl, cl = random_case(rng, p_obs=1.0)
    M[:] = True
    a = measure_value(W, M, rl, cl)
    b = measure_value(W + 1000.0, M, rl, cl)
    assert a == pytest.approx(b, abs=1e-6)


def test_positive_scale_invariance():
    rng = np.random.default_rng(6)
    W, M, rl, cl = random_case(rng)
    a = measure_value(W, M, rl, cl)
    b = measure_value(3.5 * W, M, rl, cl)
    assert a == pytest.approx(b, abs=1e-8)


def test_noncontiguous_labels_accepted():
    rng = np.random.default_rng(8)
    W = rng.uniform(0, 5, (6, 6))
    M = np.ones_like(W, dtype=bool)
    a = measure_value(W, M, np.array([5, 5, 5, 9, 9, 9]), np.full(6, 2))
    b = measure_value(W, M, np.array([1, 1, 1, 2, 2, 2]), np.ones(6, int))
    assert a == pytest.approx(b, abs=1e-10)


def test_breakdown_consistency():
    rng = np.random.default_rng(9)
    W, M, rl, cl = random_case(rng)
    m = RatingsMatrix(W, M)
    ca = CommunityAssignment(
        np.searchsorted(np.unique(rl), rl) + 1,
        np.searchsorted(np.unique(cl), cl) + 1,
    )
    bd = measure_L(m, ca)
    assert bd.total == pytest.approx(bd.per_block.sum())
    assert bd.per_block.shape == (ca.k_rows, ca.k_cols)
    assert np.all((bd.density >= 0) & (bd.density <= 1))
    text = bd.to_json()
    assert '"total"' in text


def test_local_degree_and_node_correlation():
    W = np.array([[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]])
    M = np.array([[True, True], [True, False], [False, True]])
    m = RatingsMatrix(W, M)
    ca = CommunityAssignment(np.ones(3, int), np.ones(2, int))
    assert local_degree(m, ca, 1, 0) == 4.0  # 1 + 3
    assert local_degree(m, ca, 1, 1) == 8.0  # 2 + 6
    c = node_community_correlation(m, ca, 0, 1)
    assert -1.0 <= c <= 1.0

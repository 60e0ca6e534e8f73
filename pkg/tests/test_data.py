import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from hnsm.data import (
    CommunityAssignment,
    DataFormatError,
    RatingsMatrix,
    SplitSpec,
    Transformation,
    apply_transformation,
    duplicate_nodes,
    load_csv,
    load_labels_csv,
    mcar_mask,
    relabel_contiguous,
    split,
    subnetwork_density,
    write_csv,
    write_labels_csv,
)


def rand_matrix(rng, n=8, m=6, p_obs=0.7):
    w = rng.normal(size=(n, m)) * 10
    obs = rng.random((n, m)) < p_obs
    obs[0, 0] = True  # never fully empty
    return RatingsMatrix(w, obs)


class TestRatingsMatrix:
    def test_masks_unobserved_weights(self):
        m = RatingsMatrix([[1.0, 2.0]], [[True, False]])
        assert m.weights[0, 1] == 0.0
        assert m.n_observed == 1
        assert m.density == 0.5

    def test_arrays_frozen(self):
        m = RatingsMatrix([[1.0]], [[True]])
        with pytest.raises(ValueError):
            m.weights[0, 0] = 5.0

    def test_rejects_nonfinite_observed(self):
        with pytest.raises(ValueError):
            RatingsMatrix([[np.nan]], [[True]])
        # nonfinite is fine where unobserved
        m = RatingsMatrix([[np.nan, 1.0]], [[False, True]])
        assert m.weights[0, 0] == 0.0

    def test_shape_validation(self):
        with pytest.raises(ValueError):
            RatingsMatrix(np.zeros(3), np.ones(3, dtype=bool))
        with pytest.raises(ValueError):
            RatingsMatrix(np.zeros((2, 2)), np.ones((2, 3), dtype=bool))

    def test_masked_view(self):
        m = RatingsMatrix([[1.0, 2.0]], [[True, False]])
        out = m.masked()
        assert out[0, 0] == 1.0 and np.isnan(out[0, 1])


class TestCommunityAssignment:
    def test_contiguity_enforced(self):
        with pytest.raises(ValueError):
            CommunityAssignment([1, 3], [1])  # gap
        with pytest.raises(ValueError):
            CommunityAssignment([0, 1], [1])  # zero-based
        ca = CommunityAssignment([1, 2, 1], [1, 1])
        assert ca.k_rows == 2 and ca.k_cols == 1

    def test_relabel_contiguous(self):
        out = relabel_contiguous(np.array([7, 7, 3, 9, 3]))
        np.testing.assert_array_equal(out, [1, 1, 2, 3, 2])


class TestCsvIO:
    def test_round_trip_exact(self, tmp_path):
        rng = np.random.default_rng(0)
        m = rand_matrix(rng)
        path = tmp_path / "m.csv"
        write_csv(m, path)
        back = load_csv(path)
        np.testing.assert_array_equal(back.weights, m.weights)
        np.testing.assert_array_equal(back.observed, m.observed)

    def test_missing_token(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("1.5,NA\nNA,2\n")
        m = load_csv(path, missing_token="NA")
        assert m.n_observed == 2
        assert m.weights[1, 1] == 2.0

    def test_header_skipped(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("a,b\n1,2\n")
        m = load_csv(path, header=True)
        assert m.shape == (1, 2)

    def test_ragged_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("1,2\n3\n")
        with pytest.raises(DataFormatError):
            load_csv(path)

    def test_unparseable_cell(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("1,x\n")
        with pytest.raises(DataFormatError, match="row 1, column 2"):
            load_csv(path)

    def test_labels_round_trip(self, tmp_path):
        labels = np.array([2, 1, 1, 3])
        path = tmp_path / "lab.csv"
        write_labels_csv(labels, path)
        np.testing.assert_array_equal(load_labels_csv(path), labels)


class TestTransformations:
    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError):
            Transformation("sphericalize")

    def test_none_is_identity(self):
        m = rand_matrix(np.random.default_rng(1))
        out, state = apply_transformation(m, Transformation("none"))
        assert out is m
        assert state.axis is None

    def test_center_rows_observed_mean_zero(self):
        m = rand_matrix(np.random.default_rng(2))
        out, _ = apply_transformation(m, Transformation("center-rows"))
        for r in range(m.n_rows):
            obs = m.observed[r]
            if obs.any():
                assert abs(out.weights[r, obs].mean()) < 1e-12

    def test_normalize_cols_unit_sd(self):
        m = rand_matrix(np.random.default_rng(3), p_obs=1.0)
        out, _ = apply_transformation(m, Transformation("normalize-cols"))
        for c in range(m.n_cols):
            col = out.weights[:, c]
            assert abs(col.mean()) < 1e-12
            assert col.std() == pytest.approx(1.0, abs=1e-10)

    def test_state_inverts(self):
        m = rand_matrix(np.random.default_rng(4))
        out, state = apply_transformation(m, Transformation("normalize-rows"))
        rows, cols = np.nonzero(m.observed)
        back = state.invert(out.weights[rows, cols], rows, cols)
        np.testing.assert_allclose(back, m.weights[rows, cols], atol=1e-10)
        fwd = state.apply_to(m.weights[rows, cols], rows, cols)
        np.testing.assert_allclose(fwd, out.weights[rows, cols], atol=1e-10)

    def test_degenerate_row_warns_and_centers_only(self):
        w = np.array([[5.0, 5.0], [1.0, 2.0]])
        m = RatingsMatrix(w, np.ones_like(w, dtype=bool))
        with pytest.warns(UserWarning, match="centered only"):
            out, _ = apply_transformation(m, Transformation("normalize-rows"))
        np.testing.assert_allclose(out.weights[0], [0.0, 0.0])


@settings(max_examples=25, deadline=None)
@given(
    w=arrays(np.float64, (5, 4), elements=st.floats(-100, 100)),
    kind=st.sampled_from(["center-rows", "center-cols"]),
)
def test_centering_preserves_observed_pattern(w, kind):
    m = RatingsMatrix(w, np.ones_like(w, dtype=bool))
    out, _ = apply_transformation(m, Transformation(kind))
    np.testing.assert_array_equal(out.observed, m.observed)


class TestSplit:
    def test_hold_edges_partitions_observed(self):
        m = rand_matrix(np.random.default_rng(5), n=20, m=15)
        res = split(m, SplitSpec("hold-edges", 0.3, seed=11))
        assert not (res.train.observed & res.test.observed).any()
        np.testing.assert_array_equal(
            res.train.observed | res.test.observed, m.observed
        )
        assert res.held_rows.size == 0

    def test_hold_nodes_counts(self):
        m = rand_matrix(np.random.default_rng(6), n=20, m=15, p_obs=1.0)
        res = split(m, SplitSpec("hold-nodes", 0.25, seed=2))
        assert res.held_rows.size == 5  # floor(0.25 * 20)
        assert res.held_cols.size == 3  # floor(0.25 * 15)
        # every train edge avoids held nodes entirely
        assert not res.train.observed[res.held_rows, :].any()
        assert not res.train.observed[:, res.held_cols].any()

    def test_hold_nodes_and_edges_splits_heldout(self):
        m = rand_matrix(np.random.default_rng(7), n=30, m=30, p_obs=1.0)
        res = split(m, SplitSpec("hold-nodes-and-edges", 0.3, seed=4))
        assert not (res.test.observed & res.assign.observed).any()
        held = np.zeros(m.shape, dtype=bool)
        held[res.held_rows, :] = True
        held[:, res.held_cols] = True
        np.testing.assert_array_equal(
            res.test.observed | res.assign.observed, m.observed & held
        )

    def test_deterministic_per_seed(self):
        m = rand_matrix(np.random.default_rng(8), n=12, m=12)
        a = split(m, SplitSpec("hold-edges", 0.5, seed=9))
        b = split(m, SplitSpec("hold-edges", 0.5, seed=9))
        c = split(m, SplitSpec("hold-edges", 0.5, seed=10))
        np.testing.assert_array_equal(a.test.observed, b.test.observed)
        assert (a.test.observed != c.test.observed).any()

    def test_bad_spec(self):
        with pytest.raises(ValueError):
            SplitSpec("hold-everything", 0.5)
        with pytest.raises(ValueError):
            SplitSpec("hold-edges", 0.0)


def test_subnetwork_density():
    obs = np.array([[True, True], [True, False]])
    m = RatingsMatrix(np.ones((2, 2)), obs)
    ca = CommunityAssignment([1, 2], [1, 2])
    assert subnetwork_density(m, ca, 1, 1) == 1.0
    assert subnetwork_density(m, ca, 2, 2) == 0.0


def test_mcar_mask_fraction():
    m = RatingsMatrix(np.ones((100, 100)), np.ones((100, 100), dtype=bool))
    masked = mcar_mask(m, 0.7, seed=0)
    assert masked.density == pytest.approx(0.3, abs=0.02)
    assert mcar_mask(m, 0.0) is m


def test_duplicate_nodes():
    m = RatingsMatrix([[1.0, 2.0]], [[True, False]])
    d = duplicate_nodes(m, 3)
    assert d.shape == (3, 6)
    assert d.weights[2, 0] == 1.0
    assert not d.observed[0, 5]
    assert duplicate_nodes(m, 1) is m

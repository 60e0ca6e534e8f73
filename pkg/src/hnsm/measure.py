"""Local degrees, node-community correlations, and the clustering measure L.

The measure rewards blocks whose nodes agree on an order of preferences:
for every pair (row community i, column community j) it combines the mean
and spread of the node-community correlations on both sides, scaled by
community sizes and the block's observed density:

    contribution(i, j) = [Cbar_row * (1 - sqrt(SD_row))
                          + Cbar_col * (1 - sqrt(SD_col))]
                         * max(n_i - 2, 0) * max(n_j - 2, 0)
                         * density(i, j)

Correlations are Pearson, computed pairwise-complete over observed edges;
correlations with fewer than 2 complete pairs or zero variance are scored 0.
The SD is the population standard deviation over a community's correlation
values.  Everything here is vectorized because detection evaluates L
thousands of times.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .data import CommunityAssignment, RatingsMatrix

_VAR_TOL = 1e-12


@dataclass(frozen=True)
class MeasureBreakdown:
    total: float
    per_block: np.ndarray          # K_r x K_c contributions
    mean_corr_rows: np.ndarray
    sd_corr_rows: np.ndarray
    mean_corr_cols: np.ndarray
    sd_corr_cols: np.ndarray
    density: np.ndarray

    def to_json(self) -> str:
        return json.dumps(
            {
                "total": self.total,
                "per_block": self.per_block.tolist(),
                "mean_corr_rows": self.mean_corr_rows.tolist(),
                "sd_corr_rows": self.sd_corr_rows.tolist(),
                "mean_corr_cols": self.mean_corr_cols.tolist(),
                "sd_corr_cols": self.sd_corr_cols.tolist(),
                "density": self.density.tolist(),
            },
            indent=2,
        )


def _codes(labels: np.ndarray) -> tuple[np.ndarray, int]:
    uniq, codes = np.unique(np.asarray(labels, dtype=int), return_inverse=True)
    return codes, uniq.size


def _onehot(codes: np.ndarray, k: int) -> np.ndarray:
    out = np.zeros((codes.size, k))
    out[np.arange(codes.size), codes] = 1.0
    return out


def _grouped_corr(X, Y, M, Cind):
    """Pairwise-complete correlations of rows of X against rows of Y, grouped
    by the column partition encoded in Cind (n_cols x K one-hot).

    Returns an (n_rows x K) correlation matrix with degenerate entries 0.
    X and Y should be pre-centered rowwise to limit cancellation.
    """
    Mf = M.astype(float)
    N = Mf @ Cind
    Sx = (X * Mf) @ Cind
    Sy = (Y * Mf) @ Cind
    Sxx = (X * X * Mf) @ Cind
    Syy = (Y * Y * Mf) @ Cind
    Sxy = (X * Y * Mf) @ Cind
    good = N >= 2
    Nn = np.where(good, N, 1.0)
    cov = Sxy - Sx * Sy / Nn
    vx = Sxx - Sx * Sx / Nn
    vy = Syy - Sy * Sy / Nn
    tol_x = _VAR_TOL * np.maximum(1.0, Sxx)
    tol_y = _VAR_TOL * np.maximum(1.0, Syy)
    ok = good & (vx > tol_x) & (vy > tol_y)
    denom = np.sqrt(np.maximum(vx, 0.0) * np.maximum(vy, 0.0))
    corr = np.where(ok, cov / np.where(ok, denom, 1.0), 0.0)
    return np.clip(corr, -1.0, 1.0)


def correlation_matrices(W, M, row_codes, col_codes, k_r, k_c):
    """Node-community correlation matrices for 0-based community codes.

    Returns (rowCorr: n_r x k_c, colCorr: n_c x k_r).  rowCorr[u, j] is the
    pairwise-complete Pearson correlation between u's observed weights into
    column community j and the local degrees of those columns with respect
    to u's own row community.
    """
    Mf = M.astype(float)
    Wm = W * Mf
    Rind = _onehot(row_codes, k_r)
    Cind = _onehot(col_codes, k_c)

    # local degrees of column nodes w.r.t. each row community, and of row
    # nodes w.r.t. each column community
    D = Rind.T @ Wm              # k_r x n_c
    E = Wm @ Cind                # n_r x k_c

    # row side: x = W[u, :], y = D[code(u), :]
    Yrow = D[row_codes]
    n_obs_r = np.maximum(Mf.sum(axis=1), 1.0)
    x_c = W - (Wm.sum(axis=1) / n_obs_r)[:, None]
    y_c = Yrow - ((Yrow * Mf).sum(axis=1) / n_obs_r)[:, None]
    row_corr = _grouped_corr(x_c, y_c, M, Cind)

    # column side: x = W[:, v], y = E[:, code(v)]
    Wt = W.T
    Mt = M.T
    Ycol = E.T[col_codes]
    n_obs_c = np.maximum(Mt.sum(axis=1), 1.0)
    x_c = Wt - ((Wt * Mt).sum(axis=1) / n_obs_c)[:, None]
    y_c = Ycol - ((Ycol * Mt).sum(axis=1) / n_obs_c)[:, None]
    col_corr = _grouped_corr(x_c, y_c, Mt, Rind)
    return row_corr, col_corr


def _measure_parts(W, M, row_labels, col_labels):
    row_codes, k_r = _codes(row_labels)
    col_codes, k_c = _codes(col_labels)
    row_corr, col_corr = correlation_matrices(W, M, row_codes, col_codes, k_r, k_c)

    Rind = _onehot(row_codes, k_r)
    Cind = _onehot(col_codes, k_c)
    n_i = Rind.sum(axis=0)
    n_j = Cind.sum(axis=0)

    s1_r = Rind.T @ row_corr                 # k_r x k_c
    s2_r = Rind.T @ (row_corr**2)
    mean_r = s1_r / n_i[:, None]
    sd_r = np.sqrt(np.maximum(s2_r / n_i[:, None] - mean_r**2, 0.0))

    s1_c = Cind.T @ col_corr                 # k_c x k_r
    s2_c = Cind.T @ (col_corr**2)
    mean_c = (s1_c / n_j[:, None]).T         # k_r x k_c
    sd_c = np.sqrt(np.maximum((s2_c / n_j[:, None]).T - mean_c**2, 0.0))

    Mf = M.astype(float)
    density = (Rind.T @ Mf @ Cind) / np.outer(n_i, n_j)
    size_factor = np.outer(np.maximum(n_i - 2.0, 0.0), np.maximum(n_j - 2.0, 0.0))
    per_block = (
        mean_r * (1.0 - np.sqrt(sd_r)) + mean_c * (1.0 - np.sqrt(sd_c))
    ) * size_factor * density
    return per_block, mean_r, sd_r, mean_c, sd_c, density


def measure_value(W, M, row_labels, col_labels) -> float:
    """The scalar L for raw (not necessarily contiguous) label arrays."""
    per_block = _measure_parts(W, M, row_labels, col_labels)[0]
    return float(per_block.sum())


def measure_L(m: RatingsMatrix, ca: CommunityAssignment) -> MeasureBreakdown:
    per_block, mean_r, sd_r, mean_c, sd_c, density = _measure_parts(
        m.weights, m.observed, ca.row_labels, ca.col_labels
    )
    return MeasureBreakdown(
        total=float(per_block.sum()),
        per_block=per_block,
        mean_corr_rows=mean_r,
        sd_corr_rows=sd_r,
        mean_corr_cols=mean_c,
        sd_corr_cols=sd_c,
        density=density,
    )


def local_degree(m: RatingsMatrix, ca: CommunityAssignment, i: int, v: int) -> float:
    """Sum of observed weights from rows in community i to column node v.

    An all-missing sum yields 0; callers that care about emptiness should
    check the observation counts themselves.
    """
    rows = ca.row_labels == i
    return float((m.weights[rows, v] * m.observed[rows, v]).sum())


def node_community_correlation(
    m: RatingsMatrix, ca: CommunityAssignment, u: int, j: int
) -> float:
    """C_ij(u) for row node u against column community j (0 if degenerate)."""
    row_codes, k_r = _codes(ca.row_labels)
    col_codes, k_c = _codes(ca.col_labels)
    row_corr, _ = correlation_matrices(
        m.weights, m.observed, row_codes, col_codes, k_r, k_c
    )
    return float(row_corr[u, j - 1])

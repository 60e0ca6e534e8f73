"""Per-block nonparametric estimation and edge-weight prediction.

Within each block (one row community x one column community) the pipeline
is rank-then-fit: the weight distribution is the empirical CDF of the
block's weights (midranks mapped to rank/(m+1)), sociabilities are the
ranked per-node means of normal-transformed weights, and the H-function
and noise level are chosen by least squares in normal space over a fixed
catalog, where the inner sigma minimization has the closed form

    c* = clamp(sum(a*b) / sum(b^2), (0, 1]),   sigma* = sqrt(1/c*^2 - 1)

with a the normal-transformed weights and b the normal-transformed
H-values.  Predictions invert the chain: w_hat = G^{-1}(Phi(c* *
Phi^{-1}(H(psi_u, psi_v)))), interpolating between order statistics and
clamping to the block's observed weight range.

Missing entries are imputed iteratively: fit on observed data, predict
every missing edge, then refit on observed + imputed values (10 rounds by
default), never overwriting observed values.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr, ndtri
from scipy.stats import rankdata

from .data import CommunityAssignment, RatingsMatrix
from .hfunctions import HFunctionSpec, catalog as default_catalog, eval_h

_EPS = 1e-12
_C_MIN = 1e-6            # smallest shrink factor; maps to sigma ~ 1e6
_SIGMA_SENTINEL = 1e6


class UnfittableBlockError(ValueError):
    """Raised when a block has no observed weights to fit."""


@dataclass(frozen=True)
class EmpiricalCDF:
    """Step/interpolated rank map of a block's weights.

    ``values`` are sorted distinct weights, ``probs`` their midrank/(m+1)
    levels; both forward and inverse maps interpolate linearly and clamp
    outside the observed range.
    """

    values: np.ndarray
    probs: np.ndarray

    def forward(self, w):
        return np.interp(w, self.values, self.probs)

    def inverse(self, p):
        return np.interp(p, self.probs, self.values)


def fit_empirical_G(weights) -> EmpiricalCDF:
    """Empirical CDF with tied weights at their midrank, all values strictly
    inside (0, 1)."""
    weights = np.asarray(weights, dtype=float).ravel()
    if weights.size == 0:
        raise UnfittableBlockError("unfittable block: no observed weights")
    ranks = rankdata(weights, method="average")
    probs = ranks / (weights.size + 1)
    order = np.argsort(weights, kind="stable")
    vals, idx = np.unique(weights[order], return_index=True)
    return EmpiricalCDF(vals, probs[order][idx])


@dataclass
class BlockFit:
    """Everything needed to predict edges inside one block."""

    rows: np.ndarray             # node indices of the block's rows
    cols: np.ndarray
    g_hat: EmpiricalCDF
    psi_row: np.ndarray          # per block-row sociability in (0, 1)
    psi_col: np.ndarray
    s_row: np.ndarray            # pre-rank scores (kept for held-out nodes)
    s_col: np.ndarray
    h_hat: HFunctionSpec
    c_hat: float                 # shrink factor 1/sqrt(1 + sigma^2)
    sigma_hat: float
    loss: float
    flags: list[str] = field(default_factory=list)

    def predict(self, psi_u: float, psi_v: float) -> float:
        t = self.c_hat * ndtri(
            np.clip(eval_h(self.h_hat, psi_u, psi_v), _EPS, 1 - _EPS)
        )
        return float(self.g_hat.inverse(ndtr(t)))

    def predict_grid(self, psi_u: np.ndarray, psi_v: np.ndarray) -> np.ndarray:
        h = eval_h(self.h_hat, np.asarray(psi_u)[:, None], np.asarray(psi_v)[None, :])
        t = self.c_hat * ndtri(np.clip(h, _EPS, 1 - _EPS))
        return self.g_hat.inverse(ndtr(t))

    def psi_for_new_row(self, weights, observed) -> float:
        """Sociability for a node outside the fit, from its observed edges
        into this block (interpolates the score-to-psi map)."""
        return _interp_psi(
            _node_scores(self.g_hat, np.atleast_2d(weights),
                         np.atleast_2d(observed), mean=True)[0],
            self.s_row, self.psi_row,
        )

    def psi_for_new_col(self, weights, observed) -> float:
        return _interp_psi(
            _node_scores(self.g_hat, np.atleast_2d(weights),
                         np.atleast_2d(observed), mean=True)[0],
            self.s_col, self.psi_col,
        )


def _interp_psi(score, s_vals, psi_vals) -> float:
    ok = np.isfinite(s_vals)
    if not ok.any() or not np.isfinite(score):
        return 0.5
    order = np.argsort(s_vals[ok], kind="stable")
    return float(np.interp(score, s_vals[ok][order], psi_vals[ok][order]))


def _node_scores(g: EmpiricalCDF, W, M, mean: bool):
    """Per-row mean (or sum) of normal-transformed weights over observed
    entries; NaN for rows with nothing observed."""
    a = ndtri(np.clip(g.forward(W), _EPS, 1 - _EPS))
    n = M.sum(axis=1)
    total = (a * M).sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        s = total / n if mean else np.where(n > 0, total, np.nan)
    s = np.asarray(s, dtype=float)
    s[n == 0] = np.nan
    return s


def _rank_psi(scores: np.ndarray):
    """Ranked scores mapped to rank/(n+1); nodes with NaN scores get 0.5.

    Ties are broken by node order so psi values stay distinct.
    """
    psi = np.full(scores.size, 0.5)
    ok = np.isfinite(scores)
    n = int(ok.sum())
    if n:
        ranks = rankdata(scores[ok], method="ordinal")
        psi[ok] = ranks / (n + 1)
    return psi, ~ok


def estimate_psi(block_W, block_M, g: EmpiricalCDF, psi_sum: bool = False):
    """Row and column sociabilities of one block (rank/(n+1) maps)."""
    s_row = _node_scores(g, block_W, block_M, mean=not psi_sum)
    s_col = _node_scores(g, block_W.T, block_M.T, mean=not psi_sum)
    psi_row, empty_row = _rank_psi(s_row)
    psi_col, empty_col = _rank_psi(s_col)
    return psi_row, psi_col, s_row, s_col, empty_row, empty_col


def fit_H_sigma(block_W, block_M, g, psi_row, psi_col, members):
    """Least-squares selection of (H, sigma) over the catalog.

    Returns (spec, c*, sigma*, loss, flags); ties go to the first catalog
    member.
    """
    a = ndtri(np.clip(g.forward(block_W), _EPS, 1 - _EPS))
    Mf = block_M.astype(float)
    best = None
    for spec in members:
        h = eval_h(spec, psi_row[:, None], psi_col[None, :])
        b = ndtri(np.clip(h, _EPS, 1 - _EPS))
        sbb = float((b * b * Mf).sum())
        flags: list[str] = []
        if sbb <= 0.0:
            c = _C_MIN
            flags.append("pure-noise")
        else:
            sab = float((a * b * Mf).sum())
            c = min(max(sab / sbb, _C_MIN), 1.0)
            if c == _C_MIN:
                flags.append("pure-noise")
        loss = float((((a - c * b) ** 2) * Mf).sum())
        if best is None or loss < best[3]:
            sigma = (
                _SIGMA_SENTINEL
                if c <= _C_MIN
                else float(np.sqrt(1.0 / c**2 - 1.0))
            )
            best = (spec, c, sigma, loss, flags)
    return best


def fit_block(W, M, rows, cols, members, psi_sum: bool = False) -> BlockFit:
    """Fit one block given global matrices and the block's node indices."""
    bw = W[np.ix_(rows, cols)]
    bm = M[np.ix_(rows, cols)]
    g = fit_empirical_G(bw[bm])
    psi_row, psi_col, s_row, s_col, empty_row, empty_col = estimate_psi(
        bw, bm, g, psi_sum
    )
    spec, c, sigma, loss, flags = fit_H_sigma(bw, bm, g, psi_row, psi_col, members)
    if empty_row.any() or empty_col.any():
        flags = flags + ["empty-nodes"]
    return BlockFit(
        rows=np.asarray(rows),
        cols=np.asarray(cols),
        g_hat=g,
        psi_row=psi_row,
        psi_col=psi_col,
        s_row=s_row,
        s_col=s_col,
        h_hat=spec,
        c_hat=c,
        sigma_hat=sigma,
        loss=loss,
        flags=flags,
    )


def predict_edge(fit: BlockFit, u: int, v: int) -> float:
    """Predicted weight for global node indices (u, v) inside the block."""
    iu = int(np.flatnonzero(fit.rows == u)[0])
    iv = int(np.flatnonzero(fit.cols == v)[0])
    return fit.predict(fit.psi_row[iu], fit.psi_col[iv])


@dataclass
class ModelFit:
    assignment: CommunityAssignment
    blocks: list[list[BlockFit | None]]     # K_r x K_c, None = unfittable
    iteration_changes: list[float]
    fallback_value: float | None = None     # global median for flagged blocks

    def block_for(self, u: int, v: int) -> BlockFit | None:
        i = int(self.assignment.row_labels[u]) - 1
        j = int(self.assignment.col_labels[v]) - 1
        return self.blocks[i][j]

    def predict_pairs(self, rows, cols) -> np.ndarray:
        """Predictions for arrays of (row, col) node indices."""
        out = np.empty(len(rows))
        for idx, (u, v) in enumerate(zip(rows, cols)):
            fit = self.block_for(u, v)
            if fit is None:
                out[idx] = self.fallback_value
            else:
                out[idx] = predict_edge(fit, int(u), int(v))
        return out


def fit_model(
    m: RatingsMatrix,
    ca: CommunityAssignment,
    iterations: int = 10,
    psi_sum: bool = False,
    members: list[HFunctionSpec] | None = None,
    convergence_tol: float | None = None,
):
    """Fit every block with iterative imputation of missing entries.

    Returns (ModelFit from the final iteration, fully dense completed
    RatingsMatrix).
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    members = members if members is not None else default_catalog()
    k_r, k_c = ca.k_rows, ca.k_cols
    row_idx = [np.flatnonzero(ca.row_labels == i + 1) for i in range(k_r)]
    col_idx = [np.flatnonzero(ca.col_labels == j + 1) for j in range(k_c)]
    observed = m.observed
    missing = ~observed
    global_median = float(np.median(m.observed_values()))

    current = m.weights.copy()
    current_mask = observed.copy()
    n_iter = 1 if not missing.any() else iterations
    blocks: list[list[BlockFit | None]] = [[None] * k_c for _ in range(k_r)]
    changes: list[float] = []
    prev_missing_vals = None
    for it in range(n_iter):
        for i in range(k_r):
            for j in range(k_c):
                rows, cols = row_idx[i], col_idx[j]
                try:
                    fit = fit_block(current, current_mask, rows, cols,
                                    members, psi_sum)
                except UnfittableBlockError:
                    blocks[i][j] = None
                    current[np.ix_(rows, cols)] = np.where(
                        current_mask[np.ix_(rows, cols)],
                        current[np.ix_(rows, cols)],
                        global_median,
                    )
                    continue
                blocks[i][j] = fit
                miss = missing[np.ix_(rows, cols)]
                if miss.any():
                    pred = fit.predict_grid(fit.psi_row, fit.psi_col)
                    blk = current[np.ix_(rows, cols)]
                    blk[miss] = pred[miss]
                    current[np.ix_(rows, cols)] = blk
        current_mask = np.ones_like(observed)  # imputed values join the fit
        vals = current[missing]
        if prev_missing_vals is not None and vals.size:
            changes.append(float(np.mean(np.abs(vals - prev_missing_vals))))
        prev_missing_vals = vals.copy()
        if (
            convergence_tol is not None
            and changes
            and changes[-1] < convergence_tol
        ):
            break
    if len(changes) >= 4 and not all(
        changes[k + 1] <= changes[k] + 1e-9 for k in range(2, len(changes) - 1)
    ):
        warnings.warn("imputation changes not monotone after iteration 3",
                      stacklevel=2)
    fit = ModelFit(ca, blocks, changes, fallback_value=global_median)
    completed = RatingsMatrix(current, np.ones_like(observed))
    return fit, completed

"""Sampling networks from the H-normal nonlinear sociability model.

Each edge weight is produced by mapping the incident nodes' sociability
values through the block's H-function into standard-normal space, adding
scaled idiosyncratic noise, and mapping back through the block's weight
distribution:

    W_uv = G^{-1}( Phi( Phi^{-1}(H(psi_u, psi_v)) / sqrt(1 + sigma^2)
                        + sigma * eps_uv / sqrt(1 + sigma^2) ) )

with eps_uv iid standard normal.  sigma = 0 makes the network a
deterministic function of the sociabilities.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, ndtri

from .data import (
    DOMAIN_NOISE,
    DOMAIN_PSI,
    CommunityAssignment,
    RatingsMatrix,
    _rng,
    duplicate_nodes,
    mcar_mask,
)
from .hfunctions import HFunctionSpec, eval_h

__all__ = [
    "BlockSpec",
    "GeneratorConfig",
    "canonical_config",
    "sample_network",
    "mcar_mask",
    "duplicate_nodes",
]

_EPS = 1e-12


@dataclass(frozen=True)
class BlockSpec:
    """Weight distribution (uniform), H-function, and noise level of one
    community pair."""

    g_lo: float
    g_hi: float
    h: HFunctionSpec
    sigma: float = 0.0

    def __post_init__(self):
        if not self.g_hi > self.g_lo:
            raise ValueError("uniform block distribution needs g_hi > g_lo")
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")


@dataclass(frozen=True)
class GeneratorConfig:
    row_sizes: tuple[int, ...]
    col_sizes: tuple[int, ...]
    blocks: tuple[tuple[BlockSpec, ...], ...]    # K_r x K_c
    psi_mode: str = "equally-spaced"             # or "iid-uniform"
    psi_lo: float = 0.05
    psi_hi: float = 0.95
    psi_seed: int = 0
    noise_seed: int = 0

    def __post_init__(self):
        if any(s < 1 for s in self.row_sizes) or any(s < 1 for s in self.col_sizes):
            raise ValueError("community sizes must be >= 1")
        if len(self.blocks) != len(self.row_sizes) or any(
            len(row) != len(self.col_sizes) for row in self.blocks
        ):
            raise ValueError("blocks table must be K_r x K_c")
        if self.psi_mode not in ("equally-spaced", "iid-uniform"):
            raise ValueError(f"unknown psi mode: {self.psi_mode!r}")
        if self.psi_mode == "equally-spaced" and not (
            0.0 < self.psi_lo < self.psi_hi < 1.0
        ):
            raise ValueError("equally-spaced psi needs 0 < lo < hi < 1")


def canonical_config() -> GeneratorConfig:
    """The deterministic benchmark network: 4 row x 3 column communities of
    73 nodes, sociabilities equally spaced in [.05, .95], sigma = 0.

    Diagonal blocks use the positive gamma(1/2) recipe with weights
    U(0, 200); first off-diagonal blocks (|i - j| = 1) are negative with
    U(0, 100); all remaining blocks are negative with U(0, 50).
    """
    pos = HFunctionSpec("gamma-recipe", 0.5, "positive")
    neg = HFunctionSpec("gamma-recipe", 0.5, "negative")
    blocks = []
    for i in range(4):
        row = []
        for j in range(3):
            if i == j:
                row.append(BlockSpec(0.0, 200.0, pos))
            elif abs(i - j) == 1:
                row.append(BlockSpec(0.0, 100.0, neg))
            else:
                row.append(BlockSpec(0.0, 50.0, neg))
        blocks.append(tuple(row))
    return GeneratorConfig((73,) * 4, (73,) * 3, tuple(blocks))


def _psi_tables(cfg: GeneratorConfig):
    """Sociability of every row node toward each column community and vice
    versa: (n_r x K_c, n_c x K_r) arrays."""
    k_r, k_c = len(cfg.row_sizes), len(cfg.col_sizes)
    n_r, n_c = sum(cfg.row_sizes), sum(cfg.col_sizes)
    if cfg.psi_mode == "equally-spaced":
        psi_row = np.zeros((n_r, k_c))
        start = 0
        for size in cfg.row_sizes:
            vals = np.linspace(cfg.psi_lo, cfg.psi_hi, size)
            psi_row[start : start + size, :] = vals[:, None]
            start += size
        psi_col = np.zeros((n_c, k_r))
        start = 0
        for size in cfg.col_sizes:
            vals = np.linspace(cfg.psi_lo, cfg.psi_hi, size)
            psi_col[start : start + size, :] = vals[:, None]
            start += size
    else:
        rng = _rng(cfg.psi_seed, DOMAIN_PSI)
        psi_row = rng.random((n_r, k_c))
        psi_col = rng.random((n_c, k_r))
        psi_row = np.clip(psi_row, _EPS, 1 - _EPS)
        psi_col = np.clip(psi_col, _EPS, 1 - _EPS)
    return psi_row, psi_col


def sample_network(cfg: GeneratorConfig):
    """Draw one fully observed network.

    Returns (matrix, true CommunityAssignment, psi_row table, psi_col
    table).
    """
    row_labels = np.repeat(
        np.arange(1, len(cfg.row_sizes) + 1), np.array(cfg.row_sizes)
    )
    col_labels = np.repeat(
        np.arange(1, len(cfg.col_sizes) + 1), np.array(cfg.col_sizes)
    )
    psi_row, psi_col = _psi_tables(cfg)
    n_r, n_c = row_labels.size, col_labels.size
    rng = _rng(cfg.noise_seed, DOMAIN_NOISE)
    eps = rng.standard_normal((n_r, n_c))
    W = np.zeros((n_r, n_c))
    for i, _ in enumerate(cfg.row_sizes):
        rows = row_labels == i + 1
        for j, _ in enumerate(cfg.col_sizes):
            cols = col_labels == j + 1
            blk = cfg.blocks[i][j]
            pu = psi_row[rows, j]
            pv = psi_col[cols, i]
            h = eval_h(blk.h, pu[:, None], pv[None, :])
            z = ndtri(np.clip(h, _EPS, 1 - _EPS))
            if blk.sigma > 0:
                c = 1.0 / np.sqrt(1.0 + blk.sigma**2)
                z = c * z + blk.sigma * c * eps[np.ix_(rows, cols)]
            W[np.ix_(rows, cols)] = blk.g_lo + ndtr(z) * (blk.g_hi - blk.g_lo)
    m = RatingsMatrix(W, np.ones((n_r, n_c), dtype=bool))
    return m, CommunityAssignment(row_labels, col_labels), psi_row, psi_col

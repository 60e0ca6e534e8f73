"""Data model for partially observed weighted bipartite networks.

Holds the ratings matrix type, CSV input/output, observed-only
transformations, and the three hold-out splitting schemes.  All random
splitting uses numpy's counter-based Philox generator so masks are
reproducible bit-for-bit across platforms for a given seed.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field

import numpy as np

TRANSFORM_KINDS = (
    "none",
    "center-rows",
    "center-cols",
    "normalize-rows",
    "normalize-cols",
)

SPLIT_SCHEMES = ("hold-edges", "hold-nodes", "hold-nodes-and-edges")


class DataFormatError(ValueError):
    """Malformed input file (ragged rows, unparseable cells)."""


# distinct stream domains: operations seeded with the same user seed must
# not share a Philox key, or their draw matrices correlate (e.g. a mask
# made with seed s would deterministically bias a split made with seed s)
DOMAIN_SPLIT = 1
DOMAIN_MASK = 2
DOMAIN_PSI = 3
DOMAIN_NOISE = 4
DOMAIN_CV = 5
DOMAIN_UNIFORMITY = 6


def _rng(seed: int, domain: int = 0) -> np.random.Generator:
    key = np.array([np.uint64(seed), np.uint64(domain)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class RatingsMatrix:
    """A dense weighted bipartite network with an observation mask.

    ``weights`` at unobserved positions are never read by any algorithm.
    Arrays are frozen after construction so instances can be shared freely.
    """

    weights: np.ndarray
    observed: np.ndarray

    def __post_init__(self):
        w = np.ascontiguousarray(np.asarray(self.weights, dtype=float))
        m = np.ascontiguousarray(np.asarray(self.observed, dtype=bool))
        if w.ndim != 2 or m.shape != w.shape:
            raise ValueError("weights and observed must be 2-D with equal shapes")
        if w.shape[0] < 1 or w.shape[1] < 1:
            raise ValueError("matrix must have at least one row and one column")
        if not np.all(np.isfinite(w[m])):
            raise ValueError("observed weights must be finite")
        w = w.copy()
        w[~m] = 0.0  # masked positions carry no information
        w.setflags(write=False)
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "observed", m)

    @property
    def n_rows(self) -> int:
        return self.weights.shape[0]

    @property
    def n_cols(self) -> int:
        return self.weights.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.weights.shape

    @property
    def n_observed(self) -> int:
        return int(self.observed.sum())

    @property
    def density(self) -> float:
        return self.n_observed / (self.n_rows * self.n_cols)

    def observed_values(self) -> np.ndarray:
        return self.weights[self.observed]

    def masked(self) -> np.ndarray:
        """Weights with unobserved entries as NaN (for plotting/inspection)."""
        out = self.weights.copy()
        out[~self.observed] = np.nan
        return out


@dataclass(frozen=True)
class CommunityAssignment:
    """Row and column community labels, contiguous ids starting at 1."""

    row_labels: np.ndarray
    col_labels: np.ndarray

    def __post_init__(self):
        for name in ("row_labels", "col_labels"):
            lab = np.ascontiguousarray(np.asarray(getattr(self, name), dtype=int))
            if lab.ndim != 1 or lab.size < 1:
                raise ValueError(f"{name} must be a nonempty 1-D array")
            k = lab.max()
            if lab.min() < 1 or not np.array_equal(
                np.unique(lab), np.arange(1, k + 1)
            ):
                raise ValueError(f"{name} must use contiguous ids 1..K")
            lab = lab.copy()
            lab.setflags(write=False)
            object.__setattr__(self, name, lab)

    @property
    def k_rows(self) -> int:
        return int(self.row_labels.max())

    @property
    def k_cols(self) -> int:
        return int(self.col_labels.max())


def relabel_contiguous(labels: np.ndarray) -> np.ndarray:
    """Map arbitrary integer labels to 1..K in order of first appearance."""
    labels = np.asarray(labels, dtype=int)
    out = np.empty_like(labels)
    mapping: dict[int, int] = {}
    for idx, lab in enumerate(labels):
        lab = int(lab)
        if lab not in mapping:
            mapping[lab] = len(mapping) + 1
        out[idx] = mapping[lab]
    return out


# ---------------------------------------------------------------------------
# CSV input/output

def load_csv(path, missing_token: str = "", header: bool = False) -> RatingsMatrix:
    """Read a ratings CSV (rows = users, columns = items).

    Cells equal to ``missing_token`` (after stripping whitespace) become
    unobserved entries.
    """
    rows: list[list[str]] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        for row in reader:
            rows.append(row)
    if header and rows:
        rows = rows[1:]
    if not rows:
        raise DataFormatError(f"{path}: no data rows")
    width = len(rows[0])
    weights = np.zeros((len(rows), width))
    observed = np.zeros((len(rows), width), dtype=bool)
    for r, row in enumerate(rows):
        if len(row) != width:
            raise DataFormatError(
                f"{path}: ragged rows (row {r + 1} has {len(row)} cells, "
                f"expected {width})"
            )
        for c, cell in enumerate(row):
            cell = cell.strip()
            if cell == missing_token:
                continue
            try:
                weights[r, c] = float(cell)
            except ValueError as exc:
                raise DataFormatError(
                    f"{path}: cannot parse cell at row {r + 1}, column {c + 1}: "
                    f"{cell!r}"
                ) from exc
            observed[r, c] = True
    return RatingsMatrix(weights, observed)


def write_csv(m: RatingsMatrix, path, missing_token: str = "") -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        for r in range(m.n_rows):
            writer.writerow(
                [
                    format(m.weights[r, c], ".17g") if m.observed[r, c] else missing_token
                    for c in range(m.n_cols)
                ]
            )


def write_mask_csv(m: RatingsMatrix, path) -> None:
    """Export the observation mask as a 0/1 CSV for audit."""
    np.savetxt(path, m.observed.astype(int), fmt="%d", delimiter=",")


def load_labels_csv(path) -> np.ndarray:
    """Read a label file of ``node_index,community_id`` rows (1-based ids)."""
    pairs = np.loadtxt(path, delimiter=",", dtype=int, ndmin=2)
    labels = np.zeros(pairs.shape[0], dtype=int)
    labels[pairs[:, 0]] = pairs[:, 1]
    return labels


def write_labels_csv(labels: np.ndarray, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        for idx, lab in enumerate(np.asarray(labels, dtype=int)):
            writer.writerow([idx, int(lab)])


# ---------------------------------------------------------------------------
# Transformations

@dataclass(frozen=True)
class Transformation:
    kind: str = "none"

    def __post_init__(self):
        if self.kind not in TRANSFORM_KINDS:
            raise ValueError(f"unknown transformation kind: {self.kind!r}")


@dataclass(frozen=True)
class TransformState:
    """Per-row/column offsets and scales needed to invert a transformation."""

    kind: str
    axis: str | None            # "rows" | "cols" | None
    offsets: np.ndarray | None
    scales: np.ndarray | None

    def invert(self, values: np.ndarray, rows: np.ndarray, cols: np.ndarray):
        """Map transformed-space values at (rows, cols) back to raw units."""
        values = np.asarray(values, dtype=float)
        if self.axis is None:
            return values.copy()
        idx = np.asarray(rows) if self.axis == "rows" else np.asarray(cols)
        return values * self.scales[idx] + self.offsets[idx]

    def apply_to(self, values: np.ndarray, rows: np.ndarray, cols: np.ndarray):
        values = np.asarray(values, dtype=float)
        if self.axis is None:
            return values.copy()
        idx = np.asarray(rows) if self.axis == "rows" else np.asarray(cols)
        return (values - self.offsets[idx]) / self.scales[idx]


def apply_transformation(
    m: RatingsMatrix, t: Transformation
) -> tuple[RatingsMatrix, TransformState]:
    """Center or normalize rows/columns over observed entries only.

    Rows/columns with fewer than 2 observed entries or zero observed
    variance are centered but left at scale 1 (with a warning) when
    normalizing.
    """
    if t.kind == "none":
        return m, TransformState("none", None, None, None)
    axis = "rows" if t.kind.endswith("rows") else "cols"
    normalize = t.kind.startswith("normalize")
    red_axis = 1 if axis == "rows" else 0
    n = m.observed.sum(axis=red_axis).astype(float)
    wm = m.weights * m.observed
    sums = wm.sum(axis=red_axis)
    safe_n = np.maximum(n, 1.0)
    offsets = sums / safe_n
    offsets[n == 0] = 0.0
    scales = np.ones_like(offsets)
    if normalize:
        sq = (m.weights**2 * m.observed).sum(axis=red_axis)
        var = sq / safe_n - offsets**2
        var = np.maximum(var, 0.0)
        ok = (n >= 2) & (var > 1e-18)
        scales[ok] = np.sqrt(var[ok])
        if not np.all(ok | (n == 0)):
            bad = np.flatnonzero(~ok & (n > 0))
            warnings.warn(
                f"normalize: {axis} {bad.tolist()} have <2 observations or "
                "zero variance; centered only",
                stacklevel=2,
            )
    if axis == "rows":
        new_w = (m.weights - offsets[:, None]) / scales[:, None]
    else:
        new_w = (m.weights - offsets[None, :]) / scales[None, :]
    new_w = np.where(m.observed, new_w, 0.0)
    state = TransformState(t.kind, axis, offsets, scales)
    return RatingsMatrix(new_w, m.observed), state


# ---------------------------------------------------------------------------
# Splitting

@dataclass(frozen=True)
class SplitSpec:
    scheme: str
    fraction: float
    seed: int = 0

    def __post_init__(self):
        if self.scheme not in SPLIT_SCHEMES:
            raise ValueError(f"unknown split scheme: {self.scheme!r}")
        if not 0.0 < self.fraction < 1.0:
            raise ValueError("fraction must be strictly between 0 and 1")


@dataclass(frozen=True)
class SplitResult:
    """Train/test matrices plus node-scheme bookkeeping.

    For node schemes, ``held_rows``/``held_cols`` list the withheld nodes and
    ``assign`` carries the held-out nodes' edges that remain available for
    community assignment (only distinct from ``test`` under
    hold-nodes-and-edges).
    """

    train: RatingsMatrix
    test: RatingsMatrix
    assign: RatingsMatrix | None = None
    held_rows: np.ndarray = field(default_factory=lambda: np.array([], dtype=int))
    held_cols: np.ndarray = field(default_factory=lambda: np.array([], dtype=int))


def _warn_empty(train_mask: np.ndarray, exclude_rows, exclude_cols) -> None:
    empty_rows = np.flatnonzero(~train_mask.any(axis=1))
    empty_cols = np.flatnonzero(~train_mask.any(axis=0))
    empty_rows = np.setdiff1d(empty_rows, exclude_rows)
    empty_cols = np.setdiff1d(empty_cols, exclude_cols)
    if empty_rows.size or empty_cols.size:
        warnings.warn(
            "train split left nodes with no observed edges: "
            f"rows {empty_rows.tolist()}, cols {empty_cols.tolist()}",
            stacklevel=3,
        )


def split(m: RatingsMatrix, s: SplitSpec) -> SplitResult:
    """Deterministically split observed edges into train and test.

    hold-edges assigns each observed edge to the test set independently
    with probability ``fraction``.  Node schemes withhold
    floor(fraction * n) rows and columns; all their edges leave the train
    set.  hold-nodes-and-edges further splits the withheld nodes' edges
    into assignment and test portions with the same fraction.
    """
    rng = _rng(s.seed, DOMAIN_SPLIT)
    obs = m.observed
    if s.scheme == "hold-edges":
        if m.n_observed < 2:
            raise ValueError("hold-edges needs at least 2 observed edges")
        draw = rng.random(obs.shape)
        test_mask = obs & (draw < s.fraction)
        train_mask = obs & ~test_mask
        _warn_empty(train_mask, [], [])
        return SplitResult(
            RatingsMatrix(m.weights, train_mask),
            RatingsMatrix(m.weights, test_mask),
        )
    if m.n_rows < 2 or m.n_cols < 2:
        raise ValueError("node hold-out needs at least 2 rows and 2 columns")
    k_r = int(np.floor(s.fraction * m.n_rows))
    k_c = int(np.floor(s.fraction * m.n_cols))
    held_rows = np.sort(rng.permutation(m.n_rows)[:k_r])
    held_cols = np.sort(rng.permutation(m.n_cols)[:k_c])
    held = np.zeros(obs.shape, dtype=bool)
    held[held_rows, :] = True
    held[:, held_cols] = True
    train_mask = obs & ~held
    heldout_edges = obs & held
    _warn_empty(train_mask, held_rows, held_cols)
    if s.scheme == "hold-nodes":
        return SplitResult(
            RatingsMatrix(m.weights, train_mask),
            RatingsMatrix(m.weights, heldout_edges),
            assign=RatingsMatrix(m.weights, heldout_edges),
            held_rows=held_rows,
            held_cols=held_cols,
        )
    draw = rng.random(obs.shape)
    test_mask = heldout_edges & (draw < s.fraction)
    assign_mask = heldout_edges & ~test_mask
    return SplitResult(
        RatingsMatrix(m.weights, train_mask),
        RatingsMatrix(m.weights, test_mask),
        assign=RatingsMatrix(m.weights, assign_mask),
        held_rows=held_rows,
        held_cols=held_cols,
    )


def subnetwork_density(
    m: RatingsMatrix, ca: CommunityAssignment, i: int, j: int
) -> float:
    """Fraction of observed edges in the block of row community i and column
    community j."""
    rows = ca.row_labels == i
    cols = ca.col_labels == j
    if not rows.any() or not cols.any():
        raise ValueError("community ids must be within 1..K")
    block = m.observed[np.ix_(rows, cols)]
    return float(block.sum()) / block.size


def mcar_mask(m: RatingsMatrix, p_missing: float, seed: int = 0) -> RatingsMatrix:
    """Hide each currently observed edge independently with probability
    ``p_missing``."""
    if not 0.0 <= p_missing < 1.0:
        raise ValueError("p_missing must lie in [0, 1)")
    if p_missing == 0.0:
        return m
    rng = _rng(seed, DOMAIN_MASK)
    draw = rng.random(m.shape)
    keep = m.observed & (draw >= p_missing)
    return RatingsMatrix(m.weights, keep)


def duplicate_nodes(m: RatingsMatrix, factor: int) -> RatingsMatrix:
    """Replicate every row and column ``factor`` times (factor^2 x edges)."""
    if factor < 1:
        raise ValueError("factor must be a positive integer")
    if factor == 1:
        return m
    w = np.repeat(np.repeat(m.weights, factor, axis=0), factor, axis=1)
    o = np.repeat(np.repeat(m.observed, factor, axis=0), factor, axis=1)
    return RatingsMatrix(w, o)

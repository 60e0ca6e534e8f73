"""Greedy community detection maximizing the measure L.

The driver runs two phases.  Agglomeration starts from singletons (or a
warm start on one side), treats every community as a supernode carrying
aggregate edge weights, and alternately merges the most-correlated row and
column community pairs whenever the merge does not lower L.  The repair
phase then iterates a family of heuristics: remove suspicious nodes (those
with negative or all-zero node-community correlations), regroup them into
better-matching communities, and re-agglomerate, adopting the best of 14
candidate clusterings per cycle as long as L keeps improving.

Everything is deterministic: ties in every argmax are broken by ascending
community id (and by candidate letter order a..n across clusterings).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import CommunityAssignment, RatingsMatrix, relabel_contiguous
from .measure import correlation_matrices, measure_L, measure_value

_MIN_PAIRS = 3          # complete pairs required for an aggregate correlation
_VAR_TOL = 1e-12

_CANDIDATE_LETTERS = "abcdefghijklmn"


@dataclass
class DetectionConfig:
    warm_rows: np.ndarray | None = None
    warm_cols: np.ndarray | None = None
    max_repair_cycles: int = 50
    seed: int = 0
    trace: list | None = None    # appended with dicts when provided

    def __post_init__(self):
        if self.max_repair_cycles < 1:
            raise ValueError("max_repair_cycles must be >= 1")


class _Ctx:
    """Immutable matrices shared by every step of one detection run."""

    def __init__(self, m: RatingsMatrix):
        self.W = m.weights
        self.M = m.observed
        self.Mf = m.observed.astype(float)
        self.Wm = self.W * self.Mf

    def L(self, row_labels, col_labels) -> float:
        return measure_value(self.W, self.M, row_labels, col_labels)


# ---------------------------------------------------------------------------
# aggregate bookkeeping

def _aggregates(Wm, Mf, labels):
    """Per-community summed weights and observation counts over the opposite
    side: two dicts keyed by community id."""
    sums: dict[int, np.ndarray] = {}
    cnts: dict[int, np.ndarray] = {}
    for cid in np.unique(labels):
        rows = labels == cid
        sums[int(cid)] = Wm[rows].sum(axis=0)
        cnts[int(cid)] = Mf[rows].sum(axis=0)
    return sums, cnts


def _pair_corr(sa, ca, sb, cb) -> float:
    """Pairwise-complete correlation of two aggregate vectors; 0 when fewer
    than _MIN_PAIRS complete pairs or degenerate variance."""
    valid = (ca > 0) & (cb > 0)
    n = int(valid.sum())
    if n < _MIN_PAIRS:
        return 0.0
    x = sa[valid]
    y = sb[valid]
    x = x - x.mean()
    y = y - y.mean()
    vx = float(x @ x)
    vy = float(y @ y)
    if vx <= _VAR_TOL * max(1.0, float((sa[valid] ** 2).sum())) or vy <= _VAR_TOL * max(
        1.0, float((sb[valid] ** 2).sum())
    ):
        return 0.0
    return float(np.clip((x @ y) / np.sqrt(vx * vy), -1.0, 1.0))


def _all_pair_corrs(ids, sums, cnts):
    """Dense matrix of pairwise-complete correlations between aggregates."""
    S = np.stack([sums[c] for c in ids])
    C = np.stack([cnts[c] for c in ids])
    V = (C > 0).astype(float)
    N = V @ V.T
    Sv = S * V
    Sq = S * S * V
    # per-pair sums restricted to the joint validity pattern
    Sx = Sv @ V.T
    Sy = Sx.T
    Sxx = Sq @ V.T
    Syy = Sxx.T
    Sxy = Sv @ Sv.T
    good = N >= _MIN_PAIRS
    Nn = np.where(good, N, 1.0)
    cov = Sxy - Sx * Sy / Nn
    vx = Sxx - Sx * Sx / Nn
    vy = Syy - Sy * Sy / Nn
    ok = good & (vx > _VAR_TOL * np.maximum(1.0, Sxx)) & (
        vy > _VAR_TOL * np.maximum(1.0, Syy)
    )
    denom = np.sqrt(np.maximum(vx, 0.0) * np.maximum(vy, 0.0))
    corr = np.where(ok, cov / np.where(ok, denom, 1.0), 0.0)
    return np.clip(corr, -1.0, 1.0)


# ---------------------------------------------------------------------------
# agglomeration (supernode merging)

class _Side:
    """Mutable per-side state during agglomeration."""

    def __init__(self, Wm, Mf, labels):
        self.labels = np.asarray(labels, dtype=int).copy()
        self.sums, self.cnts = _aggregates(Wm, Mf, self.labels)

    def order(self) -> list[int]:
        """Community ids by decreasing aggregate total, ties ascending id."""
        ids = sorted(self.sums)
        totals = {c: float(self.sums[c].sum()) for c in ids}
        return sorted(ids, key=lambda c: (-totals[c], c))

    def merge(self, a: int, b: int) -> None:
        self.labels[self.labels == b] = a
        self.sums[a] = self.sums[a] + self.sums[b]
        self.cnts[a] = self.cnts[a] + self.cnts[b]
        del self.sums[b], self.cnts[b]


def _attempt_merge(ctx, side: _Side, queue: list[int], other_labels, is_row: bool,
                   current_L: float) -> float:
    """Merge the queue head's most-correlated partner into it when the
    merged labeling does not lower L.  Returns the (possibly updated) L."""
    if not queue or len(side.sums) < 2:
        return current_L
    a = queue[0]
    best_b, best_corr = -1, -np.inf
    sa, ca = side.sums[a], side.cnts[a]
    for b in sorted(side.sums):
        if b == a:
            continue
        c = _pair_corr(sa, ca, side.sums[b], side.cnts[b])
        if c > best_corr:
            best_b, best_corr = b, c
    merged = side.labels.copy()
    merged[merged == best_b] = a
    if is_row:
        l_merged = ctx.L(merged, other_labels)
    else:
        l_merged = ctx.L(other_labels, merged)
    if l_merged >= current_L:
        side.merge(a, best_b)
        for idx, cid in enumerate(queue):
            if cid == best_b:
                queue[idx] = a
        return l_merged
    return current_L


def _sweep(ctx, side: _Side, other_labels, is_row: bool, current_L: float) -> float:
    """Walk community pairs by decreasing aggregate correlation and perform
    the first merge that does not lower L (at most one merge)."""
    ids = sorted(side.sums)
    if len(ids) < 2:
        return current_L
    corr = _all_pair_corrs(ids, side.sums, side.cnts)
    pos = {cid: idx for idx, cid in enumerate(ids)}
    pairs = [
        (ids[p], ids[q]) for p in range(len(ids)) for q in range(p + 1, len(ids))
    ]
    pairs.sort(key=lambda ab: (-corr[pos[ab[0]], pos[ab[1]]], ab))
    for a, b in pairs:
        merged = side.labels.copy()
        merged[merged == b] = a
        if is_row:
            l_merged = ctx.L(merged, other_labels)
        else:
            l_merged = ctx.L(other_labels, merged)
        if l_merged >= current_L:
            side.merge(a, b)
            return l_merged
    return current_L


def agglom(ctx: _Ctx, row_labels, col_labels):
    """Alternating supernode agglomeration; returns (rows, cols, L)."""
    rows = _Side(ctx.Wm, ctx.Mf, row_labels)
    cols = _Side(ctx.Wm.T, ctx.Mf.T, col_labels)
    current_L = ctx.L(rows.labels, cols.labels)
    while True:
        r_before = rows.labels.copy()
        c_before = cols.labels.copy()
        row_queue = rows.order()
        col_queue = cols.order()
        while row_queue or col_queue:
            if row_queue:
                current_L = _attempt_merge(
                    ctx, rows, row_queue, cols.labels, True, current_L
                )
                row_queue.pop(0)
            if col_queue:
                current_L = _attempt_merge(
                    ctx, cols, col_queue, rows.labels, False, current_L
                )
                col_queue.pop(0)
        if np.array_equal(rows.labels, r_before) and np.array_equal(
            cols.labels, c_before
        ):
            current_L = _sweep(ctx, rows, cols.labels, True, current_L)
            current_L = _sweep(ctx, cols, rows.labels, False, current_L)
            if np.array_equal(rows.labels, r_before) and np.array_equal(
                cols.labels, c_before
            ):
                break
    return rows.labels, cols.labels, current_L


# ---------------------------------------------------------------------------
# node removal heuristics

@dataclass
class _Removed:
    row_labels: np.ndarray
    col_labels: np.ndarray
    row_wrong: np.ndarray        # node indices stripped of their labels
    col_wrong: np.ndarray
    prev_rows: np.ndarray        # labels before removal
    prev_cols: np.ndarray
    L: float


def _corr_mats(ctx, row_labels, col_labels):
    r_uniq, r_codes = np.unique(row_labels, return_inverse=True)
    c_uniq, c_codes = np.unique(col_labels, return_inverse=True)
    row_corr, col_corr = correlation_matrices(
        ctx.W, ctx.M, r_codes, c_codes, r_uniq.size, c_uniq.size
    )
    return row_corr, col_corr, r_uniq, c_uniq


def _mark_nodes(corr_mat, labels, uniq_other, include_pairs: bool):
    """Indices whose correlation row has a negative entry or all-zero max,
    plus the multiset of opposite-side community ids their negatives hit.
    With include_pairs, members of size-2 communities are always marked."""
    wrong: list[int] = []
    hits: list[int] = []
    sizes = {int(c): int((labels == c).sum()) for c in np.unique(labels)}
    for u in range(corr_mat.shape[0]):
        row = corr_mat[u]
        flagged = row.min() < 0.0 or row.max() == 0.0
        if include_pairs and sizes[int(labels[u])] == 2:
            flagged = True
        if flagged:
            wrong.append(u)
            hits.extend(int(uniq_other[j]) for j in np.flatnonzero(row < 0.0))
    return wrong, hits


def _community_override(hits, other_labels):
    """If every negative hit points at one opposite community whose size the
    hit count reaches, return that community's members, else None."""
    if not hits:
        return None
    if min(hits) != max(hits):
        return None
    target = hits[0]
    members = np.flatnonzero(np.asarray(other_labels) == target)
    if len(hits) >= members.size:
        return members
    return None


def remove_nodes_a(ctx: _Ctx, row_labels, col_labels) -> _Removed:
    """Move every problematic node to its own new singleton community."""
    row_labels = np.asarray(row_labels, dtype=int)
    col_labels = np.asarray(col_labels, dtype=int)
    row_corr, col_corr, _, c_uniq = _corr_mats(ctx, row_labels, col_labels)
    r_uniq = np.unique(row_labels)

    row_wrong, row_hits = _mark_nodes(row_corr, row_labels, c_uniq, False)
    col_wrong, col_hits = _mark_nodes(col_corr, col_labels, r_uniq, False)

    override = _community_override(row_hits, col_labels)
    if override is not None:
        row_wrong = []
        col_wrong = sorted(set(col_wrong) | set(override.tolist()))
    override = _community_override(col_hits, row_labels)
    if override is not None:
        col_wrong = []
        row_wrong = sorted(set(row_wrong) | set(override.tolist()))

    new_rows = row_labels.copy()
    new_cols = col_labels.copy()
    next_r = int(row_labels.max()) + 1
    for u in row_wrong:
        new_rows[u] = next_r
        next_r += 1
    next_c = int(col_labels.max()) + 1
    for v in col_wrong:
        new_cols[v] = next_c
        next_c += 1
    return _Removed(
        new_rows,
        new_cols,
        np.array(row_wrong, dtype=int),
        np.array(col_wrong, dtype=int),
        row_labels,
        col_labels,
        ctx.L(new_rows, new_cols),
    )


def _group_marked(labels, corr_mat, wrong, start_id):
    """Assign marked nodes to new communities: nodes from the same origin
    community with the same sign pattern of negatives share one new
    community, except that origin communities of exactly two nodes are
    always split into two."""
    new_labels = labels.copy()
    wrong_set = set(wrong)
    next_id = start_id
    for cid in np.unique(labels):
        members = [u for u in np.flatnonzero(labels == cid) if u in wrong_set]
        if not members:
            continue
        force_split = int((labels == cid).sum()) == 2
        patterns: dict[tuple, int] = {}
        for u in members:
            pat = tuple((corr_mat[u] < 0.0).tolist())
            if force_split or pat not in patterns:
                patterns[pat if not force_split else (pat, u)] = next_id
                new_labels[u] = next_id
                next_id += 1
            else:
                new_labels[u] = patterns[pat]
    return new_labels, next_id


def remove_nodes_b(ctx: _Ctx, row_labels, col_labels) -> _Removed:
    """As remove_nodes_a, but size-2 communities are always marked, the
    whole-community override keeps the row marks, and marked nodes sharing
    an origin and negative pattern land in one new community."""
    row_labels = np.asarray(row_labels, dtype=int)
    col_labels = np.asarray(col_labels, dtype=int)
    row_corr, col_corr, _, c_uniq = _corr_mats(ctx, row_labels, col_labels)
    r_uniq = np.unique(row_labels)

    row_wrong, row_hits = _mark_nodes(row_corr, row_labels, c_uniq, True)
    col_wrong, col_hits = _mark_nodes(col_corr, col_labels, r_uniq, True)

    override = _community_override(row_hits, col_labels)
    if override is not None:
        col_wrong = sorted(set(col_wrong) | set(override.tolist()))
    override = _community_override(col_hits, row_labels)
    if override is not None:
        row_wrong = sorted(set(row_wrong) | set(override.tolist()))

    new_rows, _ = _group_marked(
        row_labels, row_corr, row_wrong, int(row_labels.max()) + 1
    )
    new_cols, _ = _group_marked(
        col_labels, col_corr, col_wrong, int(col_labels.max()) + 1
    )
    return _Removed(
        new_rows,
        new_cols,
        np.array(sorted(row_wrong), dtype=int),
        np.array(sorted(col_wrong), dtype=int),
        row_labels,
        col_labels,
        ctx.L(new_rows, new_cols),
    )


# ---------------------------------------------------------------------------
# regrouping heuristics

def _segment_corr(x_sum, x_cnt, y_sum, y_cnt, seg_codes, n_seg):
    """Pairwise-complete correlation of two aggregate vectors within each
    opposite-side community segment; 0 where degenerate."""
    valid = ((x_cnt > 0) & (y_cnt > 0)).astype(float)
    n = np.bincount(seg_codes, weights=valid, minlength=n_seg)
    sx = np.bincount(seg_codes, weights=x_sum * valid, minlength=n_seg)
    sy = np.bincount(seg_codes, weights=y_sum * valid, minlength=n_seg)
    sxx = np.bincount(seg_codes, weights=x_sum**2 * valid, minlength=n_seg)
    syy = np.bincount(seg_codes, weights=y_sum**2 * valid, minlength=n_seg)
    sxy = np.bincount(seg_codes, weights=x_sum * y_sum * valid, minlength=n_seg)
    good = n >= _MIN_PAIRS
    nn = np.where(good, n, 1.0)
    cov = sxy - sx * sy / nn
    vx = sxx - sx * sx / nn
    vy = syy - sy * sy / nn
    ok = good & (vx > _VAR_TOL * np.maximum(1.0, sxx)) & (
        vy > _VAR_TOL * np.maximum(1.0, syy)
    )
    denom = np.sqrt(np.maximum(vx, 0.0) * np.maximum(vy, 0.0))
    corr = np.where(ok, cov / np.where(ok, denom, 1.0), 0.0)
    return np.clip(corr, -1.0, 1.0), ok


def _regroup_side(Wm, Mf, labels, other_labels, wrong, ban, prev_labels,
                  all_communities: bool):
    """Shared scoring/assignment for both regrouping flavors on one side.

    Scores community i against candidate k as
    max(0, n_k - 2) * sum over opposite communities of the
    aggregate-to-aggregate correlation.  With all_communities, every
    community is rescored (allowing fusions); otherwise only communities
    whose id exceeds the pre-removal maximum move.
    """
    labels = np.asarray(labels, dtype=int)
    sums, cnts = _aggregates(Wm, Mf, labels)
    seg_uniq, seg_codes = np.unique(np.asarray(other_labels, dtype=int),
                                    return_inverse=True)
    n_seg = seg_uniq.size
    sizes = {c: int((labels == c).sum()) for c in sums}
    prev_max = int(np.asarray(prev_labels).max())
    if all_communities:
        movers = sorted(sums)
        targets = sorted(sums)
    else:
        movers = sorted(c for c in sums if c > prev_max)
        targets = sorted(c for c in sums if c <= prev_max)
    if not movers or not targets:
        return labels.copy()

    scores = np.full((len(movers), len(targets)), -np.inf)
    any_valid = np.zeros(len(movers), dtype=bool)
    for a, i in enumerate(movers):
        for b, k in enumerate(targets):
            corr, ok = _segment_corr(
                sums[i], cnts[i], sums[k], cnts[k], seg_codes, n_seg
            )
            scores[a, b] = max(0, sizes[k] - 2) * float(corr.sum())
            any_valid[a] |= bool(ok.any())

    wrong_set = set(int(u) for u in np.asarray(wrong).tolist())
    prev_labels = np.asarray(prev_labels, dtype=int)
    new_labels = labels.copy()
    for a, i in enumerate(movers):
        if not any_valid[a]:
            continue  # nothing informative; community stays as is
        members = np.flatnonzero(labels == i)
        base_best = targets[int(np.argmax(scores[a]))]
        for u in members:
            if ban and int(u) in wrong_set:
                banned = int(prev_labels[u])
                row = scores[a].copy()
                for b, k in enumerate(targets):
                    if k == banned:
                        row[b] = -np.inf
                if np.all(np.isinf(row)):
                    continue
                new_labels[u] = targets[int(np.argmax(row))]
            else:
                new_labels[u] = base_best
    return new_labels


def regroup_nodes_a(ctx: _Ctx, removed: _Removed, ban_remain: int):
    """Send each newly created community to its best-matching pre-existing
    community (optionally banning a return to the previous home)."""
    rows = _regroup_side(
        ctx.Wm, ctx.Mf, removed.row_labels, removed.col_labels,
        removed.row_wrong, ban_remain, removed.prev_rows, False,
    )
    cols = _regroup_side(
        ctx.Wm.T, ctx.Mf.T, removed.col_labels, removed.row_labels,
        removed.col_wrong, ban_remain, removed.prev_cols, False,
    )
    return rows, cols, ctx.L(rows, cols)


def regroup_nodes_b(ctx: _Ctx, removed: _Removed, ban_remain: int):
    """As regroup_nodes_a but every community is rescored against every
    other, so pre-existing communities may fuse."""
    rows = _regroup_side(
        ctx.Wm, ctx.Mf, removed.row_labels, removed.col_labels,
        removed.row_wrong, ban_remain, removed.prev_rows, True,
    )
    cols = _regroup_side(
        ctx.Wm.T, ctx.Mf.T, removed.col_labels, removed.row_labels,
        removed.col_wrong, ban_remain, removed.prev_cols, True,
    )
    return rows, cols, ctx.L(rows, cols)


# ---------------------------------------------------------------------------
# repair driver

@dataclass
class _Candidate:
    letter: str
    row_labels: np.ndarray
    col_labels: np.ndarray
    L: float

    @property
    def min_size(self) -> int:
        return min(
            int(np.unique(self.row_labels, return_counts=True)[1].min()),
            int(np.unique(self.col_labels, return_counts=True)[1].min()),
        )


def get_largest_one_step_L(ctx: _Ctx, row_labels, col_labels):
    """Build the 14 one-step candidate clusterings and return the best one
    overall plus the best among candidates with no size-1/2 community."""
    cands: list[_Candidate] = []

    def add(letter, rows, cols, L):
        cands.append(_Candidate(letter, np.asarray(rows), np.asarray(cols), L))

    a = remove_nodes_a(ctx, row_labels, col_labels)
    add("a", a.row_labels, a.col_labels, a.L)
    b = regroup_nodes_a(ctx, a, 0)
    add("b", *b)
    c = regroup_nodes_a(ctx, a, 1)
    add("c", *c)
    add("d", *agglom(ctx, a.row_labels, a.col_labels))
    add("e", *agglom(ctx, b[0], b[1]))
    add("f", *agglom(ctx, c[0], c[1]))
    g = remove_nodes_b(ctx, row_labels, col_labels)
    add("g", g.row_labels, g.col_labels, g.L)
    h = regroup_nodes_b(ctx, g, 0)
    add("h", *h)
    i = regroup_nodes_b(ctx, g, 1)
    add("i", *i)
    add("j", *agglom(ctx, g.row_labels, g.col_labels))
    add("k", *agglom(ctx, h[0], h[1]))
    add("l", *agglom(ctx, i[0], i[1]))
    mm = regroup_nodes_b(ctx, a, 0)
    add("m", *mm)
    add("n", *agglom(ctx, mm[0], mm[1]))

    best = max(cands, key=lambda cand: cand.L)  # max keeps the first of ties
    larger = [cand for cand in cands if cand.min_size > 2]
    best_larger = max(larger, key=lambda cand: cand.L) if larger else best
    return best, best_larger


def _exhaustive_pair_merge(ctx: _Ctx, row_labels, col_labels):
    """Best single merge of any pair of row communities or of column
    communities, or None if no pair exists."""
    best = None
    for labels, other, is_row in (
        (row_labels, col_labels, True),
        (col_labels, row_labels, False),
    ):
        ids = np.unique(labels)
        for p in range(ids.size):
            for q in range(p + 1, ids.size):
                merged = labels.copy()
                merged[merged == ids[q]] = ids[p]
                L = ctx.L(merged, other) if is_row else ctx.L(other, merged)
                if best is None or L > best[0]:
                    best = (
                        L,
                        merged if is_row else row_labels,
                        merged if not is_row else col_labels,
                    )
    return best


def fix_communities(ctx: _Ctx, row_labels, col_labels, L,
                    max_repair_cycles: int = 50, trace: list | None = None):
    """Repair loop: adopt improving candidate clusterings until none is
    found (or the cycle cap is reached)."""
    row_labels = np.asarray(row_labels, dtype=int).copy()
    col_labels = np.asarray(col_labels, dtype=int).copy()
    current = L
    for cycle in range(max_repair_cycles):
        best, best_larger = get_largest_one_step_L(ctx, row_labels, col_labels)
        adopted = None
        if best.L > current:
            adopted = best
        else:
            best2, _ = get_largest_one_step_L(
                ctx, best_larger.row_labels, best_larger.col_labels
            )
            if best2.L > current:
                adopted = _Candidate(
                    "larger:" + best2.letter,
                    best2.row_labels,
                    best2.col_labels,
                    best2.L,
                )
            else:
                pair = _exhaustive_pair_merge(ctx, row_labels, col_labels)
                if pair is not None and pair[0] > current:
                    adopted = _Candidate("pair", pair[1], pair[2], pair[0])
        if adopted is None:
            break
        assert adopted.L > current  # monotone acceptance
        if trace is not None:
            trace.append(
                {
                    "cycle": cycle,
                    "heuristic": adopted.letter,
                    "L_before": current,
                    "L_after": adopted.L,
                }
            )
        row_labels = relabel_contiguous(adopted.row_labels)
        col_labels = relabel_contiguous(adopted.col_labels)
        current = adopted.L
    return row_labels, col_labels, current


# ---------------------------------------------------------------------------
# public entry points

def detect(m: RatingsMatrix, cfg: DetectionConfig | None = None):
    """Full detection: agglomeration from singletons (or warm-start labels)
    followed by the repair loop.  Returns (CommunityAssignment,
    MeasureBreakdown)."""
    if m.n_observed < 1:
        raise ValueError("detection needs at least one observed edge")
    cfg = cfg or DetectionConfig()
    ctx = _Ctx(m)
    rows0 = (
        np.asarray(cfg.warm_rows, dtype=int)
        if cfg.warm_rows is not None
        else np.arange(1, m.n_rows + 1)
    )
    cols0 = (
        np.asarray(cfg.warm_cols, dtype=int)
        if cfg.warm_cols is not None
        else np.arange(1, m.n_cols + 1)
    )
    rows, cols, L = agglom(ctx, rows0, cols0)
    if cfg.trace is not None:
        cfg.trace.append({"phase": "agglom", "L": L})
    rows, cols, L = fix_communities(
        ctx, rows, cols, L, cfg.max_repair_cycles, cfg.trace
    )
    ca = CommunityAssignment(relabel_contiguous(rows), relabel_contiguous(cols))
    return ca, measure_L(m, ca)


def assign_heldout(
    m_train: RatingsMatrix,
    ca: CommunityAssignment,
    edges: np.ndarray,
    observed: np.ndarray,
    side: str,
) -> int:
    """Community for a held-out node, chosen by tentatively placing it in
    each community on its side and taking the L-argmax (ties -> lowest id).

    ``edges``/``observed`` describe the node's weights toward the opposite
    side of the training matrix.  A node with no observed edge is a cold
    start and is rejected.
    """
    edges = np.asarray(edges, dtype=float)
    observed = np.asarray(observed, dtype=bool)
    if not observed.any():
        raise ValueError("cold start: held-out node has no observed edges")
    if side == "row":
        W = np.vstack([m_train.weights, np.where(observed, edges, 0.0)])
        M = np.vstack([m_train.observed, observed])
        k = ca.k_rows
        base = ca.row_labels
        other = ca.col_labels
    elif side == "col":
        W = np.hstack([m_train.weights, np.where(observed, edges, 0.0)[:, None]])
        M = np.hstack([m_train.observed, observed[:, None]])
        k = ca.k_cols
        base = ca.col_labels
        other = ca.row_labels
    else:
        raise ValueError("side must be 'row' or 'col'")
    best_c, best_L = 1, -np.inf
    for cand in range(1, k + 1):
        labels = np.append(base, cand)
        L = (
            measure_value(W, M, labels, other)
            if side == "row"
            else measure_value(W, M, other, labels)
        )
        if L > best_L:
            best_c, best_L = cand, L
    return best_c

"""Metrics, transformation cross-validation, and the end-to-end pipeline.

The pipeline runs split -> (optional transformation CV) -> community
detection -> block fitting with iterative imputation -> prediction of the
withheld edges, and assembles an EvaluationReport.  NMAE follows the joke
-ratings convention: mean absolute error divided by the rating range.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

import numpy as np
from sklearn.metrics import normalized_mutual_info_score

from .data import (
    DOMAIN_CV,
    CommunityAssignment,
    _rng,
    RatingsMatrix,
    SplitResult,
    SplitSpec,
    TRANSFORM_KINDS,
    Transformation,
    apply_transformation,
    relabel_contiguous,
    split,
)
from .detection import DetectionConfig, assign_heldout, detect
from .estimation import fit_model

_NMI_VARIANTS = {"arithmetic": "arithmetic", "min": "min", "sqrt": "geometric"}


def mse(pred, truth) -> float:
    pred = np.asarray(pred, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if pred.shape != truth.shape:
        raise ValueError("prediction/truth length mismatch")
    if pred.size < 1:
        raise ValueError("need at least one pair")
    return float(np.mean((pred - truth) ** 2))


def rmse(pred, truth) -> float:
    return float(np.sqrt(mse(pred, truth)))


def nmae(pred, truth, value_range: tuple[float, float]) -> float:
    lo, hi = value_range
    if not hi > lo:
        raise ValueError("range must satisfy hi > lo")
    pred = np.asarray(pred, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if pred.shape != truth.shape:
        raise ValueError("prediction/truth length mismatch")
    return float(np.mean(np.abs(pred - truth)) / (hi - lo))


def nmi(labels_a, labels_b, variant: str = "arithmetic") -> float:
    """Normalized mutual information, 2I/(Ha+Hb) by default."""
    labels_a = np.asarray(labels_a)
    labels_b = np.asarray(labels_b)
    if labels_a.shape != labels_b.shape:
        raise ValueError("label length mismatch")
    return float(
        normalized_mutual_info_score(
            labels_a, labels_b, average_method=_NMI_VARIANTS[variant]
        )
    )


# ---------------------------------------------------------------------------
# report

@dataclass
class EvaluationReport:
    scheme: str
    fraction: float
    seed: int
    transformation: str
    k_rows: int
    k_cols: int
    metrics: dict[str, float]
    imputation_changes: list[float] = field(default_factory=list)
    cv_table: dict[str, float] | None = None
    n_test: int = 0
    wall_clock_seconds: float = 0.0

    def to_json(self) -> str:
        return json.dumps(self.__dict__, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "EvaluationReport":
        return cls(**json.loads(text))


# ---------------------------------------------------------------------------
# pipeline helpers

def _reduced_train(train: RatingsMatrix, held_rows, held_cols):
    keep_r = np.setdiff1d(np.arange(train.n_rows), held_rows)
    keep_c = np.setdiff1d(np.arange(train.n_cols), held_cols)
    sub = RatingsMatrix(
        train.weights[np.ix_(keep_r, keep_c)],
        train.observed[np.ix_(keep_r, keep_c)],
    )
    return sub, keep_r, keep_c


def _predict_split(model_fit, completed, res: SplitResult, train_sub,
                   keep_r, keep_c, ca):
    """Predictions for every test edge, handling held-out nodes.

    Held-out nodes are assigned to communities via the assignment edges and
    given sociabilities interpolated from their observed edges into each
    block.
    """
    test_rows, test_cols = np.nonzero(res.test.observed)
    if res.held_rows.size == 0 and res.held_cols.size == 0:
        return completed.weights[test_rows, test_cols]

    pos_r = {int(r): idx for idx, r in enumerate(keep_r)}
    pos_c = {int(c): idx for idx, c in enumerate(keep_c)}
    assign = res.assign
    row_comm: dict[int, int] = {}
    col_comm: dict[int, int] = {}
    for u in res.held_rows:
        obs = assign.observed[u, keep_c]
        if not obs.any():
            continue
        row_comm[int(u)] = assign_heldout(
            train_sub, ca, assign.weights[u, keep_c], obs, "row"
        )
    for v in res.held_cols:
        obs = assign.observed[keep_r, v]
        if not obs.any():
            continue
        col_comm[int(v)] = assign_heldout(
            train_sub, ca, assign.weights[keep_r, v], obs, "col"
        )

    fallback = model_fit.fallback_value
    held_r = set(int(u) for u in res.held_rows)
    held_c = set(int(v) for v in res.held_cols)
    preds = np.empty(test_rows.size)
    for idx, (u, v) in enumerate(zip(test_rows, test_cols)):
        u, v = int(u), int(v)
        i = row_comm.get(u) if u in held_r else int(ca.row_labels[pos_r[u]])
        j = col_comm.get(v) if v in held_c else int(ca.col_labels[pos_c[v]])
        if i is None or j is None:
            preds[idx] = fallback
            continue
        fit = model_fit.blocks[i - 1][j - 1]
        if fit is None:
            preds[idx] = fallback
            continue
        block_cols_orig = keep_c[fit.cols]
        block_rows_orig = keep_r[fit.rows]
        if u in held_r:
            psi_u = fit.psi_for_new_row(
                assign.weights[u, block_cols_orig],
                assign.observed[u, block_cols_orig],
            )
        else:
            psi_u = fit.psi_row[int(np.flatnonzero(keep_r[fit.rows] == u)[0])]
        if v in held_c:
            psi_v = fit.psi_for_new_col(
                assign.weights[block_rows_orig, v],
                assign.observed[block_rows_orig, v],
            )
        else:
            psi_v = fit.psi_col[int(np.flatnonzero(keep_c[fit.cols] == v)[0])]
        preds[idx] = fit.predict(psi_u, psi_v)
    return preds


@dataclass
class PipelineOptions:
    transformation: str = "none"
    use_cv: bool = False
    cv_folds: int = 3
    iterations: int = 10
    psi_sum: bool = False
    value_range: tuple[float, float] | None = None
    detection: DetectionConfig | None = None
    truth_rows: np.ndarray | None = None
    truth_cols: np.ndarray | None = None
    nmi_variant: str = "arithmetic"


def _detect_with_transform(train: RatingsMatrix, kind: str,
                           cfg: DetectionConfig | None):
    t_matrix, _ = apply_transformation(train, Transformation(kind))
    ca, _ = detect(t_matrix, cfg or DetectionConfig())
    return ca


def cross_validate_transformations(
    train: RatingsMatrix,
    folds: int = 3,
    transformations=TRANSFORM_KINDS,
    seed: int = 0,
    iterations: int = 10,
    value_range: tuple[float, float] | None = None,
    detection_cfg: DetectionConfig | None = None,
):
    """Pick the transformation whose fold-mean NMAE is minimal.

    Folds partition the observed edges.  Detection runs on the transformed
    remaining folds; fitting and scoring use the untransformed values.
    """
    obs_rows, obs_cols = np.nonzero(train.observed)
    n_obs = obs_rows.size
    if n_obs < 3 * folds:
        raise ValueError(
            f"not enough observed edges for {folds}-fold CV: {n_obs}"
        )
    rng = _rng(seed, DOMAIN_CV)
    fold_of = rng.integers(folds, size=n_obs)
    vr = value_range or (
        float(train.observed_values().min()),
        float(train.observed_values().max()),
    )
    means: dict[str, float] = {}
    for kind in transformations:
        scores = []
        for f in range(folds):
            hold = fold_of == f
            fit_mask = train.observed.copy()
            fit_mask[obs_rows[hold], obs_cols[hold]] = False
            fit_matrix = RatingsMatrix(train.weights, fit_mask)
            ca = _detect_with_transform(fit_matrix, kind, detection_cfg)
            _, completed = fit_model(fit_matrix, ca, iterations=iterations)
            pred = completed.weights[obs_rows[hold], obs_cols[hold]]
            truth = train.weights[obs_rows[hold], obs_cols[hold]]
            scores.append(nmae(pred, truth, vr))
        means[kind] = float(np.mean(scores))
    best = min(transformations, key=lambda k: means[k])  # ties -> listing order
    return best, means


def evaluate_pipeline(
    m: RatingsMatrix, split_spec: SplitSpec, options: PipelineOptions | None = None
) -> EvaluationReport:
    """Run the full pipeline on one split and report metrics."""
    options = options or PipelineOptions()
    t0 = time.perf_counter()
    res = split(m, split_spec)
    if res.test.n_observed == 0:
        raise ValueError("empty test set; increase the split fraction")

    cv_table = None
    kind = options.transformation
    train_for_detect = res.train
    if res.held_rows.size or res.held_cols.size:
        train_sub, keep_r, keep_c = _reduced_train(
            res.train, res.held_rows, res.held_cols
        )
    else:
        train_sub, keep_r, keep_c = (
            res.train,
            np.arange(m.n_rows),
            np.arange(m.n_cols),
        )
    if options.use_cv:
        kind, cv_table = cross_validate_transformations(
            train_sub,
            folds=options.cv_folds,
            seed=split_spec.seed,
            iterations=options.iterations,
            value_range=options.value_range,
            detection_cfg=options.detection,
        )
    ca = _detect_with_transform(train_sub, kind, options.detection)
    model_fit, completed = fit_model(
        train_sub, ca, iterations=options.iterations, psi_sum=options.psi_sum
    )
    preds = _predict_split(model_fit, completed, res, train_sub, keep_r, keep_c, ca)
    truth = res.test.weights[res.test.observed]

    metrics = {"mse": mse(preds, truth), "rmse": rmse(preds, truth)}
    vr = options.value_range
    if vr is None:
        all_vals = m.observed_values()
        vr = (float(all_vals.min()), float(all_vals.max()))
    if vr[1] > vr[0]:
        metrics["nmae"] = nmae(preds, truth, vr)
    if options.truth_rows is not None and not res.held_rows.size:
        metrics["nmi_rows"] = nmi(
            relabel_contiguous(options.truth_rows)[keep_r],
            ca.row_labels,
            options.nmi_variant,
        )
    if options.truth_cols is not None and not res.held_cols.size:
        metrics["nmi_cols"] = nmi(
            relabel_contiguous(options.truth_cols)[keep_c],
            ca.col_labels,
            options.nmi_variant,
        )
    return EvaluationReport(
        scheme=split_spec.scheme,
        fraction=split_spec.fraction,
        seed=split_spec.seed,
        transformation=kind,
        k_rows=ca.k_rows,
        k_cols=ca.k_cols,
        metrics=metrics,
        imputation_changes=model_fit.iteration_changes,
        cv_table=cv_table,
        n_test=int(truth.size),
        wall_clock_seconds=time.perf_counter() - t0,
    )

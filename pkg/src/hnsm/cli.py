"""Command-line entry point.

Subcommands: simulate | detect | fit | predict | evaluate | jester-ingest.
Every directory-producing subcommand writes a run manifest recording the
resolved configuration, seeds, input checksums, and artifact paths, so a
run can be reproduced bit-for-bit (wall-clock fields aside).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .data import (
    RatingsMatrix,
    SplitSpec,
    load_csv,
    load_labels_csv,
    write_csv,
    write_labels_csv,
    write_mask_csv,
    CommunityAssignment,
)
from .detection import DetectionConfig, detect
from .estimation import BlockFit, EmpiricalCDF, ModelFit, fit_model
from .evaluation import PipelineOptions, evaluate_pipeline
from .generator import (
    BlockSpec,
    GeneratorConfig,
    canonical_config,
    duplicate_nodes,
    mcar_mask,
    sample_network,
)
from .hfunctions import catalog_by_id
from .plots import save_imputation_trace, save_matrix_heatmap


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_manifest(outdir, subcommand, config, seeds, inputs, artifacts,
                    elapsed) -> None:
    manifest = {
        "subcommand": subcommand,
        "config": config,
        "seeds": seeds,
        "input_checksums": {str(p): _sha256(p) for p in inputs},
        "artifacts": sorted(str(a) for a in artifacts),
        "tool_version": __version__,
        "wall_clock_seconds": elapsed,
    }
    with open(os.path.join(outdir, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)


def _load_matrix(args) -> RatingsMatrix:
    return load_csv(args.matrix, missing_token=args.missing_token,
                    header=args.header)


def _add_matrix_args(p) -> None:
    p.add_argument("matrix", help="ratings CSV (rows = users, columns = items)")
    p.add_argument("--missing-token", default="",
                   help="cell value marking unobserved edges (default: empty)")
    p.add_argument("--header", action="store_true",
                   help="skip one header line")


# ---------------------------------------------------------------------------
# simulate

def _config_from_json(path) -> GeneratorConfig:
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    members = catalog_by_id(include_auxiliary=True)
    blocks = tuple(
        tuple(
            BlockSpec(b["g_lo"], b["g_hi"], members[b["h"]], b.get("sigma", 0.0))
            for b in row
        )
        for row in raw["blocks"]
    )
    return GeneratorConfig(
        tuple(raw["row_sizes"]),
        tuple(raw["col_sizes"]),
        blocks,
        psi_mode=raw.get("psi_mode", "equally-spaced"),
        psi_lo=raw.get("psi_lo", 0.05),
        psi_hi=raw.get("psi_hi", 0.95),
        psi_seed=raw.get("psi_seed", 0),
        noise_seed=raw.get("noise_seed", 0),
    )


def _cmd_simulate(args) -> int:
    t0 = time.perf_counter()
    if args.canonical:
        cfg = canonical_config()
        if args.seed:
            cfg = GeneratorConfig(
                cfg.row_sizes, cfg.col_sizes, cfg.blocks,
                psi_mode=cfg.psi_mode, psi_lo=cfg.psi_lo, psi_hi=cfg.psi_hi,
                psi_seed=args.seed, noise_seed=args.seed,
            )
    elif args.config:
        cfg = _config_from_json(args.config)
    else:
        raise SystemExit("simulate needs --canonical or --config FILE")
    m, truth, psi_row, psi_col = sample_network(cfg)
    if args.duplicate > 1:
        m = duplicate_nodes(m, args.duplicate)
        truth = CommunityAssignment(
            np.repeat(truth.row_labels, args.duplicate),
            np.repeat(truth.col_labels, args.duplicate),
        )
    if args.missing > 0:
        m = mcar_mask(m, args.missing, seed=args.seed)
    os.makedirs(args.out, exist_ok=True)
    artifacts = []

    def out(name):
        path = os.path.join(args.out, name)
        artifacts.append(path)
        return path

    write_csv(m, out("matrix.csv"))
    write_mask_csv(m, out("mask.csv"))
    write_labels_csv(truth.row_labels, out("truth_rows.csv"))
    write_labels_csv(truth.col_labels, out("truth_cols.csv"))
    np.savetxt(out("psi_rows.csv"), psi_row, delimiter=",", fmt="%.17g")
    np.savetxt(out("psi_cols.csv"), psi_col, delimiter=",", fmt="%.17g")
    if args.figure:
        save_matrix_heatmap(m, out("matrix.png"), title="observed network",
                            ca=truth)
    config = {
        "canonical": args.canonical,
        "config": args.config,
        "missing": args.missing,
        "duplicate": args.duplicate,
    }
    _write_manifest(args.out, "simulate", config, {"seed": args.seed},
                    [args.config] if args.config else [], artifacts,
                    time.perf_counter() - t0)
    return 0


# ---------------------------------------------------------------------------
# detect

def _cmd_detect(args) -> int:
    t0 = time.perf_counter()
    m = _load_matrix(args)
    trace: list | None = [] if args.trace else None
    cfg = DetectionConfig(
        warm_rows=load_labels_csv(args.warm_rows) if args.warm_rows else None,
        warm_cols=load_labels_csv(args.warm_cols) if args.warm_cols else None,
        max_repair_cycles=args.max_repair_cycles,
        seed=args.seed,
        trace=trace,
    )
    ca, breakdown = detect(m, cfg)
    os.makedirs(args.out, exist_ok=True)
    artifacts = []

    def out(name):
        path = os.path.join(args.out, name)
        artifacts.append(path)
        return path

    write_labels_csv(ca.row_labels, out("row_labels.csv"))
    write_labels_csv(ca.col_labels, out("col_labels.csv"))
    if args.explain:
        with open(out("measure.json"), "w", encoding="utf-8") as fh:
            fh.write(breakdown.to_json())
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as fh:
            for entry in trace:
                fh.write(json.dumps(entry, sort_keys=True) + "\n")
    inputs = [args.matrix]
    if args.warm_rows:
        inputs.append(args.warm_rows)
    if args.warm_cols:
        inputs.append(args.warm_cols)
    config = {
        "warm_rows": args.warm_rows,
        "warm_cols": args.warm_cols,
        "max_repair_cycles": args.max_repair_cycles,
        "measure_L": breakdown.total,
        "k_rows": ca.k_rows,
        "k_cols": ca.k_cols,
    }
    _write_manifest(args.out, "detect", config, {"seed": args.seed}, inputs,
                    artifacts, time.perf_counter() - t0)
    print(f"detected {ca.k_rows} row and {ca.k_cols} column communities "
          f"(L = {breakdown.total:.6g})")
    return 0


# ---------------------------------------------------------------------------
# fit / predict

def _model_to_json(fit: ModelFit) -> dict:
    blocks = []
    for row in fit.blocks:
        out_row = []
        for b in row:
            if b is None:
                out_row.append(None)
            else:
                out_row.append(
                    {
                        "rows": b.rows.tolist(),
                        "cols": b.cols.tolist(),
                        "h_hat": b.h_hat.id,
                        "c_hat": b.c_hat,
                        "sigma_hat": b.sigma_hat,
                        "loss": b.loss,
                        "flags": b.flags,
                        "psi_row": b.psi_row.tolist(),
                        "psi_col": b.psi_col.tolist(),
                        "s_row": b.s_row.tolist(),
                        "s_col": b.s_col.tolist(),
                        "g_values": b.g_hat.values.tolist(),
                        "g_probs": b.g_hat.probs.tolist(),
                    }
                )
        blocks.append(out_row)
    return {
        "row_labels": fit.assignment.row_labels.tolist(),
        "col_labels": fit.assignment.col_labels.tolist(),
        "fallback_value": fit.fallback_value,
        "iteration_changes": fit.iteration_changes,
        "blocks": blocks,
    }


def _model_from_json(raw: dict) -> ModelFit:
    members = catalog_by_id(include_auxiliary=True)
    blocks = []
    for row in raw["blocks"]:
        out_row = []
        for b in row:
            if b is None:
                out_row.append(None)
            else:
                out_row.append(
                    BlockFit(
                        rows=np.array(b["rows"], dtype=int),
                        cols=np.array(b["cols"], dtype=int),
                        g_hat=EmpiricalCDF(
                            np.array(b["g_values"]), np.array(b["g_probs"])
                        ),
                        psi_row=np.array(b["psi_row"]),
                        psi_col=np.array(b["psi_col"]),
                        s_row=np.array(b["s_row"]),
                        s_col=np.array(b["s_col"]),
                        h_hat=members[b["h_hat"]],
                        c_hat=b["c_hat"],
                        sigma_hat=b["sigma_hat"],
                        loss=b["loss"],
                        flags=list(b["flags"]),
                    )
                )
        blocks.append(out_row)
    ca = CommunityAssignment(
        np.array(raw["row_labels"], dtype=int),
        np.array(raw["col_labels"], dtype=int),
    )
    return ModelFit(ca, blocks, list(raw["iteration_changes"]),
                    raw["fallback_value"])


def _cmd_fit(args) -> int:
    t0 = time.perf_counter()
    m = _load_matrix(args)
    row_labels = load_labels_csv(os.path.join(args.labels, "row_labels.csv"))
    col_labels = load_labels_csv(os.path.join(args.labels, "col_labels.csv"))
    ca = CommunityAssignment(row_labels, col_labels)
    fit, completed = fit_model(m, ca, iterations=args.iterations,
                               psi_sum=args.psi_sum)
    os.makedirs(args.out, exist_ok=True)
    model_path = args.out_model or os.path.join(args.out, "model.json")
    completed_path = args.out_completed or os.path.join(args.out,
                                                        "completed.csv")
    with open(model_path, "w", encoding="utf-8") as fh:
        json.dump(_model_to_json(fit), fh, indent=2, sort_keys=True)
    write_csv(completed, completed_path)
    _write_manifest(
        args.out, "fit",
        {"iterations": args.iterations, "psi_sum": args.psi_sum,
         "labels": args.labels},
        {}, [args.matrix], [model_path, completed_path],
        time.perf_counter() - t0,
    )
    return 0


def _cmd_predict(args) -> int:
    with open(args.model, encoding="utf-8") as fh:
        fit = _model_from_json(json.load(fh))
    pairs = np.loadtxt(args.pairs, delimiter=",", dtype=int, ndmin=2)
    preds = fit.predict_pairs(pairs[:, 0], pairs[:, 1])
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        for (u, v), w in zip(pairs, preds):
            writer.writerow([int(u), int(v), format(w, ".17g")])
    return 0


# ---------------------------------------------------------------------------
# evaluate

def _cmd_evaluate(args) -> int:
    t0 = time.perf_counter()
    m = _load_matrix(args)
    spec = SplitSpec(args.scheme, args.fraction, args.seed)
    value_range = None
    if args.range:
        lo, hi = (float(x) for x in args.range.split(","))
        value_range = (lo, hi)
    options = PipelineOptions(
        transformation=args.transformation,
        use_cv=args.cv,
        iterations=args.iterations,
        psi_sum=args.psi_sum,
        value_range=value_range,
        detection=DetectionConfig(max_repair_cycles=args.max_repair_cycles,
                                  seed=args.seed),
        truth_rows=load_labels_csv(args.truth_rows) if args.truth_rows else None,
        truth_cols=load_labels_csv(args.truth_cols) if args.truth_cols else None,
    )
    report = evaluate_pipeline(m, spec, options)
    os.makedirs(args.out, exist_ok=True)
    artifacts = []

    def out(name):
        path = os.path.join(args.out, name)
        artifacts.append(path)
        return path

    report_path = args.report or out("report.json")
    with open(report_path, "w", encoding="utf-8") as fh:
        fh.write(report.to_json())
    if report_path not in artifacts:
        artifacts.append(report_path)
    save_matrix_heatmap(m, out("observed.png"), title="observed network")
    if report.imputation_changes:
        save_imputation_trace(report.imputation_changes,
                              out("imputation.png"))
    config = {
        "scheme": args.scheme,
        "fraction": args.fraction,
        "cv": args.cv,
        "transformation": args.transformation,
        "iterations": args.iterations,
        "range": args.range,
    }
    _write_manifest(args.out, "evaluate", config, {"seed": args.seed},
                    [args.matrix], artifacts, time.perf_counter() - t0)
    print(json.dumps(report.metrics, indent=2, sort_keys=True))
    return 0


# ---------------------------------------------------------------------------
# jester-ingest

def _cmd_jester_ingest(args) -> int:
    rows = []
    with open(args.raw, newline="", encoding="utf-8") as fh:
        for r, row in enumerate(csv.reader(fh)):
            if not row:
                continue
            if len(row) != 101:
                raise SystemExit(
                    f"{args.raw}: row {r + 1} has {len(row)} cells, expected "
                    "101 (count + 100 ratings)"
                )
            try:
                count = int(float(row[0]))
                vals = [float(x) for x in row[1:]]
            except ValueError as exc:
                raise SystemExit(f"{args.raw}: row {r + 1}: {exc}") from exc
            if count != args.rated_exactly:
                continue
            rows.append(vals)
    if not rows:
        raise SystemExit(
            f"no users rated exactly {args.rated_exactly} jokes"
        )
    arr = np.array(rows)
    observed = arr != args.sentinel
    rated = arr[observed]
    if rated.size and (rated.min() < -10 or rated.max() > 10):
        raise SystemExit(
            "ratings outside [-10, 10] found; check the sentinel value"
        )
    m = RatingsMatrix(np.where(observed, arr, 0.0), observed)
    write_csv(m, args.out)
    print(f"{m.n_rows} users x {m.n_cols} jokes, density {m.density:.3f}")
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hnsm",
        description="Community detection and rating prediction for "
                    "partially observed weighted bipartite networks",
    )
    parser.add_argument("--threads", type=int,
                        default=int(os.environ.get("HNSM_THREADS", "1")),
                        help="cap on worker threads (default: HNSM_THREADS or 1)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="sample a network from the model")
    p.add_argument("--canonical", action="store_true",
                   help="use the built-in 292x219 benchmark network")
    p.add_argument("--config", help="generator config JSON")
    p.add_argument("--missing", type=float, default=0.0,
                   help="MCAR missingness probability")
    p.add_argument("--duplicate", type=int, default=1,
                   help="replicate every node this many times")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--figure", action="store_true",
                   help="also render a heatmap of the network")
    p.add_argument("-o", "--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("detect", help="detect row and column communities")
    _add_matrix_args(p)
    p.add_argument("--warm-rows", help="label CSV to warm-start row communities")
    p.add_argument("--warm-cols", help="label CSV to warm-start column communities")
    p.add_argument("--max-repair-cycles", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trace", help="write a JSONL trace of adopted steps")
    p.add_argument("--explain", action="store_true",
                   help="write the per-block measure breakdown")
    p.add_argument("-o", "--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_detect)

    p = sub.add_parser("fit", help="fit block models and impute missing edges")
    _add_matrix_args(p)
    p.add_argument("--labels", required=True,
                   help="directory with row_labels.csv and col_labels.csv")
    p.add_argument("--iterations", type=int, default=10)
    p.add_argument("--psi-sum", action="store_true",
                   help="use summed (not mean) scores for sociability ranking")
    p.add_argument("--out-model", help="model JSON path (default: OUT/model.json)")
    p.add_argument("--out-completed",
                   help="completed matrix CSV (default: OUT/completed.csv)")
    p.add_argument("-o", "--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("predict", help="predict edges from a fitted model")
    p.add_argument("--model", required=True, help="model JSON from fit")
    p.add_argument("--pairs", required=True,
                   help="CSV of row_index,col_index pairs")
    p.add_argument("-o", "--out", required=True, help="predictions CSV")
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("evaluate", help="run the full hold-out pipeline")
    _add_matrix_args(p)
    p.add_argument("--scheme", default="hold-edges",
                   choices=["hold-edges", "hold-nodes", "hold-nodes-and-edges"])
    p.add_argument("--fraction", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cv", action="store_true",
                   help="choose the transformation by 3-fold cross-validation")
    p.add_argument("--transformation", default="none",
                   choices=["none", "center-rows", "center-cols",
                            "normalize-rows", "normalize-cols"])
    p.add_argument("--iterations", type=int, default=10)
    p.add_argument("--psi-sum", action="store_true")
    p.add_argument("--max-repair-cycles", type=int, default=50)
    p.add_argument("--range", help="rating range for NMAE, e.g. -10,10")
    p.add_argument("--truth-rows", help="true row labels CSV (adds NMI)")
    p.add_argument("--truth-cols", help="true column labels CSV (adds NMI)")
    p.add_argument("--report", help="report JSON path (default: OUT/report.json)")
    p.add_argument("-o", "--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("jester-ingest",
                       help="extract a fixed-rated-count cohort from a raw "
                            "joke-ratings export")
    p.add_argument("raw", help="raw CSV: rated-count column + 100 ratings")
    p.add_argument("--rated-exactly", type=int, required=True)
    p.add_argument("--sentinel", type=float, default=99.0,
                   help="unrated sentinel value (default 99)")
    p.add_argument("-o", "--out", required=True, help="output matrix CSV")
    p.set_defaults(func=_cmd_jester_ingest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SystemExit:
        raise
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

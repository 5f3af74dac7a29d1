"""Command-line surface: train one method, evaluate a checkpoint, run the
eight-method comparison, and render report SVGs.

Every command is deterministic given (flags, data bytes, seed); manifests
written next to each artifact record enough to reproduce it bit-exactly
(wall-clock fields excepted). Exit codes: 0 success, 1 runtime/data error,
2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict

from .data import (
    FeatureSet,
    SplitConfig,
    binarize_labels,
    dsef_bytes,
    read_features,
    stratified_split,
)
from .denn import DennConfig, denn_fit, denn_predict_proba, load_denn, save_denn, DENN_MAGIC
from .ensembles import (
    ENSEMBLE_KINDS,
    ENSM_MAGIC,
    EnsembleConfig,
    decide_labels,
    ensemble_fit,
    ensemble_predict_proba,
    load_ensemble,
    save_ensemble,
)
from .metrics import MetricsReport, evaluate_predictions
from .numeric import derive_seed
from .report import confusion_grid_svg, radar_svg
from .smote import SmoteConfig, smote_balance

METHODS = ENSEMBLE_KINDS + ("denn",)

COMPARISON_HEADER = ["method", "accuracy", "precision", "recall", "f1", "g_mean"]


def _default_seed() -> int:
    return int(os.environ.get("ENSEMBLEKIT_SEED", "0"))


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _file_sha256(path) -> str:
    with open(path, "rb") as fh:
        return _sha256(fh.read())


def _write_atomic(path, data: str | bytes) -> None:
    mode = "wb" if isinstance(data, bytes) else "w"
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, mode) as fh:
        fh.write(data)
    os.replace(tmp, path)


def _write_manifest(path, manifest: dict) -> None:
    _write_atomic(path, json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _prepare(data_path, threshold, seed, test_fraction, smote_k):
    """Shared pipeline front: read, binarize, stratified split, SMOTE(train)."""
    fset = binarize_labels(read_features(data_path), threshold)
    train, test = stratified_split(
        fset, SplitConfig(test_fraction=test_fraction, seed=derive_seed(seed, 11))
    )
    balanced = smote_balance(train, SmoteConfig(k_neighbors=smote_k, seed=derive_seed(seed, 12)))
    split_hash = _sha256(dsef_bytes(train) + dsef_bytes(test))
    smote_hash = _sha256(dsef_bytes(balanced))
    return balanced, test, split_hash, smote_hash


def _ensemble_config(args, seed: int) -> EnsembleConfig:
    return EnsembleConfig(
        n_trees=args.trees,
        tree_depth=args.tree_depth,
        boosting_rounds=args.rounds,
        shrinkage=args.shrinkage,
        blend_holdout=args.blend_holdout,
        dynamic_threshold=args.dynamic_threshold,
        seed=seed,
    )


def _fit_method(method: str, train: FeatureSet, args, seed: int):
    """Fit one method; returns (model, config_snapshot, epoch_losses|None)."""
    if method == "denn":
        cfg = DennConfig(
            input_dim=train.dim,
            branch_width=args.branch_width,
            epochs=args.epochs,
            batch_size=args.batch_size,
            lr=args.lr,
            seed=seed,
        )
        model, report = denn_fit(train, cfg)
        return model, asdict(cfg), report.epoch_losses
    cfg = _ensemble_config(args, seed)
    return ensemble_fit(method, train, cfg), asdict(cfg), None


def _predict(model, fset: FeatureSet):
    """(probs, kind, dynamic_threshold) for a DENN or ensemble model."""
    if hasattr(model, "w_meta"):
        return denn_predict_proba(model, fset), "denn", 0.5
    probs = ensemble_predict_proba(model, fset)
    thr = model.members.get("threshold", model.config.dynamic_threshold)
    return probs, model.kind, thr


def _save_model(model, path) -> None:
    if hasattr(model, "w_meta"):
        save_denn(model, path)
    else:
        save_ensemble(model, path)


def _load_model(path):
    with open(path, "rb") as fh:
        magic = fh.read(4)
    if magic == DENN_MAGIC:
        return load_denn(path)
    if magic == ENSM_MAGIC:
        return load_ensemble(path)
    raise ValueError(f"{path}: unknown model magic {magic!r}")


def _print_report(report: MetricsReport, out=sys.stdout) -> None:
    d = report.as_dict()
    for key in ("accuracy", "precision", "recall", "f1", "g_mean"):
        print(f"{key:<10} {d[key]:.6f}", file=out)
    print(f"{'confusion':<10} {d['confusion']}", file=out)


# ---------------------------------------------------------------------------
# subcommands


def cmd_train(args) -> int:
    started = time.time()
    seed = args.seed if args.seed is not None else _default_seed()
    train, test, split_hash, smote_hash = _prepare(
        args.data, args.threshold, seed, args.test_fraction, args.smote_k
    )
    model, cfg_snapshot, epoch_losses = _fit_method(args.method, train, args, derive_seed(seed, 13))
    if epoch_losses is not None:
        for i, loss in enumerate(epoch_losses, start=1):
            print(f"epoch {i:>3}  loss {loss:.6f}")
    _save_model(model, args.out)
    _write_manifest(f"{args.out}.manifest", {
        "command": "train",
        "method": args.method,
        "config": cfg_snapshot,
        "seed": seed,
        "threshold": args.threshold,
        "data": {"path": str(args.data), "sha256": _file_sha256(args.data)},
        "split": {"test_fraction": args.test_fraction, "hash": split_hash},
        "smote": {"k_neighbors": args.smote_k, "hash": smote_hash},
        "outputs": [str(args.out)],
        "timing": {"duration_seconds": time.time() - started},
    })
    print(f"wrote {args.out}")
    return 0


def cmd_evaluate(args) -> int:
    model = _load_model(args.model)
    fset = binarize_labels(read_features(args.data), args.threshold)
    probs, kind, thr = _predict(model, fset)
    y_pred = decide_labels(probs, kind, thr)
    report = evaluate_predictions(fset.labels, y_pred)
    _print_report(report)
    if args.json:
        _write_atomic(args.json, json.dumps(report.as_dict(), indent=2, sort_keys=True) + "\n")
    return 0


def cmd_compare(args) -> int:
    started = time.time()
    seed = args.seed if args.seed is not None else _default_seed()
    os.makedirs(args.out_dir, exist_ok=True)
    train, test, split_hash, smote_hash = _prepare(
        args.data, args.threshold, seed, args.test_fraction, args.smote_k
    )

    def run(method_index):
        index, method = method_index
        t0 = time.time()
        method_seed = derive_seed(seed, 20, index)
        model, cfg_snapshot, _ = _fit_method(method, train, args, method_seed)
        probs, kind, thr = _predict(model, test)
        report = evaluate_predictions(test.labels, decide_labels(probs, kind, thr))
        return method, model, cfg_snapshot, method_seed, report, time.time() - t0

    order = list(enumerate(METHODS))
    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(run, order))
    else:
        results = [run(mi) for mi in order]

    rows, radar_entries, manifest_methods = [], [], {}
    for method, model, cfg_snapshot, method_seed, report, duration in results:
        d = report.as_dict()
        rows.append([method] + [f"{d[k]:.6f}" for k in COMPARISON_HEADER[1:]])
        radar_entries.append({"method": method, "accuracy": d["accuracy"],
                              "precision": d["precision"], "f1": d["f1"],
                              "g_mean": d["g_mean"]})
        model_path = os.path.join(args.out_dir, f"model_{method}.bin")
        _save_model(model, model_path)
        cm = report.confusion
        confusion_path = os.path.join(args.out_dir, f"confusion_{method}.csv")
        _write_atomic(confusion_path, "\n".join([
            ",pred_0,pred_1",
            f"true_0,{cm[0][0]},{cm[0][1]}",
            f"true_1,{cm[1][0]},{cm[1][1]}",
        ]) + "\n")
        manifest_methods[method] = {
            "seed": method_seed,
            "config": cfg_snapshot,
            "metrics": {k: d[k] for k in ("accuracy", "precision", "recall", "f1", "g_mean")},
            # relative to out_dir so same-seed runs agree byte-for-byte
            "outputs": [os.path.basename(model_path), os.path.basename(confusion_path)],
            "timing": {"duration_seconds": duration},
        }

    lines = [",".join(COMPARISON_HEADER)] + [",".join(r) for r in rows]
    _write_atomic(os.path.join(args.out_dir, "comparison.csv"), "\n".join(lines) + "\n")
    _write_atomic(os.path.join(args.out_dir, "radar.json"),
                  json.dumps(radar_entries, indent=2, sort_keys=True) + "\n")
    _write_atomic(os.path.join(args.out_dir, "radar.svg"), radar_svg(radar_entries))
    _write_manifest(os.path.join(args.out_dir, "compare.manifest.json"), {
        "command": "compare",
        "seed": seed,
        "threshold": args.threshold,
        "data": {"path": str(args.data), "sha256": _file_sha256(args.data)},
        "split": {"test_fraction": args.test_fraction, "hash": split_hash},
        "smote": {"k_neighbors": args.smote_k, "hash": smote_hash},
        "methods": manifest_methods,
        "timing": {"duration_seconds": time.time() - started},
    })
    for line in lines:
        print(line)
    return 0


def cmd_report(args) -> int:
    radar_path = os.path.join(args.compare_dir, "radar.json")
    csv_path = os.path.join(args.compare_dir, "comparison.csv")
    if not (os.path.exists(radar_path) and os.path.exists(csv_path)):
        raise FileNotFoundError(f"no comparison data in {args.compare_dir}")
    with open(radar_path) as fh:
        entries = json.load(fh)
    with open(csv_path, newline="") as fh:
        methods = [row["method"] for row in csv.DictReader(fh)]
    items = []
    for method in methods:
        with open(os.path.join(args.compare_dir, f"confusion_{method}.csv"), newline="") as fh:
            rows = list(csv.reader(fh))
        items.append((method, [[int(v) for v in row[1:]] for row in rows[1:]]))
    _write_atomic(args.out, radar_svg(entries))
    stem, ext = os.path.splitext(args.out)
    grid_path = f"{stem}_confusion{ext or '.svg'}"
    _write_atomic(grid_path, confusion_grid_svg(items))
    print(f"wrote {args.out}")
    print(f"wrote {grid_path}")
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def _add_pipeline_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", required=True, help="feature file (DSEF or CSV)")
    p.add_argument("--threshold", required=True, type=float,
                   help="power-loss cut: records at or above are labeled soiled")
    p.add_argument("--seed", type=int, default=None,
                   help="master seed (default: $ENSEMBLEKIT_SEED, else 0)")
    p.add_argument("--test-fraction", type=float, default=0.2)
    p.add_argument("--smote-k", type=int, default=5)


def _add_method_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--branch-width", type=int, default=128)
    p.add_argument("--trees", type=int, default=100)
    p.add_argument("--tree-depth", type=int, default=None)
    p.add_argument("--rounds", type=int, default=100)
    p.add_argument("--shrinkage", type=float, default=0.1)
    p.add_argument("--blend-holdout", type=float, default=0.3)
    p.add_argument("--dynamic-threshold", type=float, default=0.5)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ensemblekit",
        description="Train and compare soiling classifiers over precomputed image features.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train one method and save a checkpoint")
    p.add_argument("--method", required=True, choices=METHODS)
    _add_pipeline_flags(p)
    _add_method_flags(p)
    p.add_argument("--out", required=True, help="model checkpoint path")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="evaluate a checkpoint on a feature file")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--threshold", required=True, type=float)
    p.add_argument("--json", default=None, help="also write metrics as JSON")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("compare", help="train and evaluate all eight methods on one shared split")
    _add_pipeline_flags(p)
    _add_method_flags(p)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--jobs", type=int, default=1, help="parallel method fits (same results)")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("report", help="render radar and confusion-grid SVGs from a compare dir")
    p.add_argument("--compare-dir", required=True)
    p.add_argument("--out", required=True, help="radar SVG path")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError, IndexError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()

"""Command-line entry point: ``stereo360 <subcommand> ...``.

Exit codes: 0 success, 2 usage, 3 data error, 4 provenance mismatch,
5 numeric failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from dataclasses import replace

import numpy as np

from . import dataset, evaluation, regression
from .errors import InvalidParameterError, ProvenanceError, Stereo360Error
from .fsim import fsim
from .pipeline import PipelineConfig, extract_image_features, feature_matrix, manifest_features
from .projection import to_gray
from .regression import SvrModel, assemble_features
from .viewpoints import sample_viewpoints

log = logging.getLogger("stereo360")

DEFAULTS = {
    "n0": 8, "fov": 90.0, "viewport_size": None, "assembly": "WQA", "depth_kind": "entropy",
    "layout": None, "C": 1.0, "gamma": None, "epsilon": 0.1, "seed": 0, "threads": None,
    "iters": 1000, "train_fraction": 0.67, "format": None,
}


def _resolve(args) -> argparse.Namespace:
    """flags > config file > defaults."""
    cfg = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            cfg = json.load(fh)
        unknown = set(cfg) - set(DEFAULTS)
        if unknown:
            raise InvalidParameterError(f"unknown config key(s): {', '.join(sorted(unknown))}")
    for key, default in DEFAULTS.items():
        if getattr(args, key, None) is None:
            setattr(args, key, cfg.get(key, default))
    if args.threads is None:
        args.threads = os.cpu_count() or 1
    return args


def _config(args, target: str | None = None) -> PipelineConfig:
    cfg = PipelineConfig(n0=args.n0, fov=args.fov, viewport_size=args.viewport_size,
                         assembly=args.assembly, depth_kind=args.depth_kind)
    if target is not None:
        cfg = cfg.for_target(target)
    if getattr(args, "layout", None):
        cfg = replace(cfg, layout=args.layout)
    return cfg


def _emit(rows: list[dict], fmt: str, out=None) -> None:
    out = out or sys.stdout
    if fmt == "json":
        out.write(json.dumps(rows, indent=1, sort_keys=True) + "\n")
        return
    if not rows:
        return
    w = csv.DictWriter(out, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)


def _write_or_print(text: str, path: str | None) -> None:
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_sample_viewports(args) -> int:
    vps = sample_viewpoints(args.n0)
    rows = [{"ring_index": v.ring_index, "latitude": v.latitude, "longitude": v.longitude} for v in vps]
    _emit(rows, args.format or "csv")
    return 0


def cmd_fsim(args) -> int:
    ref = to_gray(dataset.load_image(args.ref))
    dist = to_gray(dataset.load_image(args.dist))
    print(f"{fsim(ref, dist):.10f}")
    return 0


def _viewport_rows(records, image: str | None = None) -> list[dict]:
    rows = []
    for i, r in enumerate(records):
        row = {} if image is None else {"image": image}
        row.update({"viewport": i, "ring_index": r.ring_index, "latitude": r.latitude,
                    "longitude": r.longitude, "q_left": r.q_left, "q_right": r.q_right,
                    "w_left": r.w_left, "w_right": r.w_right, "q_fused": r.q_fused,
                    "depth_entropy": r.depth["entropy"], "depth_mean": r.depth["mean"],
                    "depth_stddev": r.depth["stddev"]})
        rows.append(row)
    return rows


def _image_args_given(args) -> bool:
    return all(getattr(args, k) for k in ("ref_left", "ref_right", "dist_left", "dist_right"))


def cmd_extract_features(args) -> int:
    cfg = _config(args)
    rows = []
    if args.manifest:
        entries = dataset.load_manifest(args.manifest)
        for e, recs in zip(entries, manifest_features(entries, cfg, args.threads)):
            rows.extend(_viewport_rows(recs, e.dist_left))
    elif _image_args_given(args):
        ref = dataset.load_erp_pair(args.ref_left, args.ref_right, "reference")
        dist = dataset.load_erp_pair(args.dist_left, args.dist_right, "distorted")
        rows = _viewport_rows(extract_image_features(ref, dist, cfg, args.threads))
    else:
        raise InvalidParameterError("give --manifest or all four image paths")
    buf = io.StringIO()
    _emit(rows, args.format or "csv", buf)
    _write_or_print(buf.getvalue(), args.out)
    return 0


def _model_config(args, model: SvrModel) -> PipelineConfig:
    p = model.provenance
    cfg = replace(_config(args), layout=p.get("layout", "quality"), assembly=p.get("assembly", "WQA"),
                  depth_kind=p.get("depth_kind", "entropy"))
    return cfg


def cmd_score(args) -> int:
    if not _image_args_given(args):
        raise InvalidParameterError("score needs --ref-left, --ref-right, --dist-left and --dist-right")
    ref = dataset.load_erp_pair(args.ref_left, args.ref_right, "reference")
    dist = dataset.load_erp_pair(args.dist_left, args.dist_right, "distorted")
    models = [SvrModel.load(p) for p in args.model]
    base = _config(args)
    width = ref.left.shape[1]
    for m in models:
        regression.check_provenance(m.provenance, _model_config(args, m).provenance(width))
    records = extract_image_features(ref, dist, base, args.threads, dump_dir=args.dump_viewports)
    n = len(records)
    rows = []
    for path, m in zip(args.model, models):
        cfg = _model_config(args, m)
        x = assemble_features(records, cfg.layout, cfg.assembly, cfg.depth_kind, n)
        score = regression.predict(m, x, cfg.provenance(width))
        rows.append({"target": m.provenance.get("target", ""), "model": path, "score": score})
    fmt = args.format or "text"
    if fmt == "text":
        for r in rows:
            print(f"{r['target'] or r['model']}: {r['score']:.10f}")
    else:
        _emit(rows, fmt)
    if args.explain:
        buf = io.StringIO()
        _emit([{k: r[k] for k in ("viewport", "q_left", "q_right", "w_left", "w_right", "q_fused")}
               for r in _viewport_rows(records)], "csv", buf)
        _write_or_print(buf.getvalue(), None if args.explain == "-" else args.explain)
    return 0


def _dataset(args, target: str, cfg: PipelineConfig):
    entries = dataset.load_manifest(args.manifest)
    if not entries:
        raise dataset.ManifestError(f"{args.manifest}: no entries")
    records = manifest_features(entries, cfg, args.threads)
    X = feature_matrix(records, cfg)
    y = np.array([e.target(target) for e in entries])
    return entries, X, y


def cmd_train(args) -> int:
    cfg = _config(args, args.target)
    entries, X, y = _dataset(args, args.target, cfg)
    C, gamma = args.C, args.gamma
    if args.grid_search:
        C, gamma, mse = regression.grid_search(X, y, epsilon=args.epsilon, seed=args.seed)
        log.info("grid search picked C=%g gamma=%g (cv mse %.4g)", C, gamma, mse)
    width = dataset.load_image(entries[0].ref_left).shape[1]
    prov = {**cfg.provenance(width), "target": args.target}
    model = regression.train(X, y, C=C, gamma=gamma, epsilon=args.epsilon, provenance=prov)
    model.save(args.out)
    print(f"trained {args.target} model on {len(entries)} images, "
          f"{model.support_vectors.shape[0]} support vectors -> {args.out}")
    return 0


def _report_rows(report: evaluation.EvaluationReport) -> list[dict]:
    d = report.as_dict()
    return [{k: d[k] for k in ("subset", "n", "plcc", "srocc", "rmse", "logistic_converged")}]


def cmd_evaluate(args) -> int:
    model = SvrModel.load(args.model)
    target = model.provenance.get("target", "quality")
    cfg = _model_config(args, model)
    entries, X, y = _dataset(args, target, cfg)
    width = dataset.load_image(entries[0].ref_left).shape[1]
    pred = regression.predict(model, X, cfg.provenance(width))
    mask = evaluation.subset_mask([e.symmetry for e in entries], args.subset, len(entries))
    report = evaluation.evaluate_predictions(pred[mask], y[mask], args.subset)
    report.split = {"provenance": model.provenance}
    fmt = args.format or "json"
    if fmt == "json":
        _write_or_print(json.dumps(report.as_dict(), indent=1, sort_keys=True) + "\n", args.out)
    else:
        buf = io.StringIO()
        _emit(_report_rows(report), "csv", buf)
        _write_or_print(buf.getvalue(), args.out)
    return 0


def cmd_cross_validate(args) -> int:
    cfg = _config(args, args.target)
    entries, X, y = _dataset(args, args.target, cfg)
    subsets = args.subset or ["all", "symmetric", "asymmetric"]
    params = {"C": args.C, "gamma": args.gamma, "epsilon": args.epsilon}
    report = evaluation.cross_validate(
        X, y, [e.content_id for e in entries], [e.symmetry for e in entries], subsets=subsets,
        n_iter=args.iters, train_fraction=args.train_fraction, seed=args.seed, svr_params=params,
        grid_search=args.grid_search, target=args.target, workers=args.threads)
    width = dataset.load_image(entries[0].ref_left).shape[1]
    out = report.as_dict()
    out["provenance"] = cfg.provenance(width)
    fmt = args.format or "json"
    if fmt == "json":
        if not args.full:
            out.pop("iterations")
        text = json.dumps(out, indent=1, sort_keys=True) + "\n"
    else:
        buf = io.StringIO()
        _emit([{"target": args.target, "subset": s, "failures": report.failures[s], **report.median[s]}
               for s in subsets], "csv", buf)
        text = buf.getvalue()
    _write_or_print(text, args.out)
    return 0


def _add_pipeline_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with default option values")
    p.add_argument("--n0", type=int, help="viewpoints on the equator (default 8)")
    p.add_argument("--fov", type=float, help="viewport field of view in degrees (default 90)")
    p.add_argument("--viewport-size", type=int, help="viewport side in pixels (default ERP width / 4)")
    p.add_argument("--assembly", choices=regression.ASSEMBLIES)
    p.add_argument("--depth-kind", choices=("entropy", "mean", "stddev"))
    p.add_argument("--threads", type=int, help="worker threads (default: all cores)")
    p.add_argument("--format", choices=("csv", "json"))


def _add_images(p: argparse.ArgumentParser) -> None:
    for name in ("ref-left", "ref-right", "dist-left", "dist-right"):
        p.add_argument(f"--{name}")


def _add_svr_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--C", type=float, dest="C")
    p.add_argument("--gamma", type=float)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--grid-search", action="store_true")
    p.add_argument("--seed", type=int)
    p.add_argument("--layout", choices=regression.LAYOUTS, help="override the per-target feature layout")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="stereo360", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample-viewports", help="list the ordered viewpoints")
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_sample_viewports)

    p = sub.add_parser("fsim", help="FSIM of two images")
    p.add_argument("--ref", required=True)
    p.add_argument("--dist", required=True)
    p.set_defaults(func=cmd_fsim)

    p = sub.add_parser("extract-features", help="per-viewport qualities and depth features")
    _add_pipeline_flags(p)
    _add_images(p)
    p.add_argument("--manifest")
    p.add_argument("--out")
    p.set_defaults(func=cmd_extract_features)

    p = sub.add_parser("score", help="predict quality / QoE of one stereo image")
    _add_pipeline_flags(p)
    _add_images(p)
    p.add_argument("--model", action="append", required=True, help="model JSON (repeatable)")
    p.add_argument("--explain", nargs="?", const="-", help="per-viewport CSV to PATH (or stdout)")
    p.add_argument("--dump-viewports", help="write rendered viewports as PNG into this directory")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("train", help="train an SVR model from a manifest")
    _add_pipeline_flags(p)
    _add_svr_flags(p)
    p.add_argument("--manifest", required=True)
    p.add_argument("--target", choices=("quality", "qoe"), required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="score a manifest with a trained model")
    _add_pipeline_flags(p)
    p.add_argument("--manifest", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--subset", choices=evaluation.SUBSETS, default="all")
    p.add_argument("--out")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("cross-validate", help="repeated content-split cross-validation")
    _add_pipeline_flags(p)
    _add_svr_flags(p)
    p.add_argument("--manifest", required=True)
    p.add_argument("--target", choices=("quality", "qoe"), required=True)
    p.add_argument("--iters", type=int)
    p.add_argument("--train-fraction", type=float)
    p.add_argument("--subset", action="append", choices=evaluation.SUBSETS)
    p.add_argument("--full", action="store_true", help="include per-iteration reports in JSON output")
    p.add_argument("--out")
    p.set_defaults(func=cmd_cross_validate)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        _resolve(args)
        return args.func(args)
    except ProvenanceError as exc:
        print(f"provenance mismatch: {exc}", file=sys.stderr)
        return exc.exit_code
    except Stereo360Error as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except FloatingPointError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 5


if __name__ == "__main__":
    sys.exit(main())

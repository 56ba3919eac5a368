"""Command-line interface: ``hkrig {fit,hfit,predict,sweep,bench,data}``.

Exit status: 0 success, 1 usage error, 2 data error, 3 fit failure,
4 benchmark threshold violated.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from . import bench, io
from .data import (
    FidelityPair,
    forrester_doe,
    forrester_hf,
    Dataset,
    load_csv,
    save_csv,
)
from .errors import DataError, FitError, KrigingError, NoModelError, ShapeError
from .gp import Estimation, fit
from .hierarchical import HierarchicalModel, fit_hierarchical
from .kernels import CorrelationSpec, Family, Structure
from .optimize import Method, OptimizerSpec
from .selection import (
    AXES,
    CombinationGrid,
    Criterion,
    Mode,
    run_sweep,
    select_best,
    write_report,
    write_timings,
)
from .trend import TrendSpec

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_FIT, EXIT_THRESHOLD = 0, 1, 2, 3, 4
WORKERS_ENV = "HKRIG_WORKERS"
TREND_CHOICES = ["Ordinary", "Polynomial1", "Polynomial2", "Polynomial3", "Polynomial4"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _bool(text):
    t = text.strip().lower()
    if t in ("true", "1", "yes"):
        return True
    if t in ("false", "0", "no"):
        return False
    raise argparse.ArgumentTypeError(f"expected true/false, got {text!r}")


def _columns(text):
    return [c.strip() for c in text.split(",") if c.strip()]


def _add_data_options(p, required=(), optional=()):
    for name in required:
        p.add_argument(f"--{name}", required=True, help="CSV file with a header row")
    for name in optional:
        p.add_argument(f"--{name}", default=None, help="CSV file with a header row")
    p.add_argument("--inputs", type=_columns, default=None,
                   help="comma-separated input columns (default: x1..xd)")
    p.add_argument("--output-col", default="y")
    p.add_argument("--noise-col", default=None,
                   help="column of per-row noise variances (overrides replicate estimates)")


def _add_model_options(p):
    p.add_argument("--family", choices=[f.value for f in Family], default="Gaussian")
    p.add_argument("--structure", choices=[s.value for s in Structure], default="Separable")
    p.add_argument("--isotropic", type=_bool, default=False)
    p.add_argument("--trend", choices=TREND_CHOICES, default="Ordinary")
    p.add_argument("--estimation", choices=[e.value for e in Estimation], default="MLE")
    p.add_argument("--optimizer", choices=[m.value for m in Method], default="HybridDE")


def _add_common(p):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hkrig", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("fit", help="fit a conventional Kriging model")
    _add_data_options(p, ["data"])
    _add_model_options(p)
    _add_common(p)

    p = sub.add_parser("hfit", help="fit a two-level Hierarchical Kriging model")
    _add_data_options(p, ["lf-data", "hf-data"])
    _add_model_options(p)
    _add_common(p)

    p = sub.add_parser("predict", help="evaluate a saved model")
    p.add_argument("--model", required=True)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--query", help="CSV of query points")
    g.add_argument("--grid", help="regular lattice, per dimension min:max:count, comma separated")
    p.add_argument("--inputs", type=_columns, default=None)
    p.add_argument("--out", required=True)

    p = sub.add_parser("sweep", help="fit and score every combination of Kriging options")
    _add_data_options(p, ["hf-data", "validate"], ["lf-data"])
    p.add_argument("--mode", choices=[m.value for m in Mode], default="hierarchical")
    p.add_argument("--grid", action="append", default=[], metavar="AXIS=V1[,V2]",
                   help=f"restrict an axis ({', '.join(AXES)}); repeatable")
    p.add_argument("--workers", type=int, default=None,
                   help=f"worker processes (default: ${WORKERS_ENV} or 1)")
    p.add_argument("--shared-lf", action="store_true",
                   help="fit the LF model once (Separable Gaussian, Ordinary, MLE) for all rows")
    _add_common(p)

    p = sub.add_parser("bench", help="run a self-checking benchmark")
    p.add_argument("name", choices=["forrester", "synthetic3d"])
    p.add_argument("--seeds", type=int, default=1, help="number of consecutive seeds to run")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--threshold", action="append", default=[], metavar="KEY=VALUE",
                   help="override a pass/fail threshold")
    _add_common(p)

    p = sub.add_parser("data", help="write a built-in benchmark dataset as CSV")
    p.add_argument("name", choices=["forrester", "synthetic3d"])
    _add_common(p)
    return parser


# ---------------------------------------------------------------------------


def _out_dir(path):
    os.makedirs(path, exist_ok=True)
    return path


def _write_json(path, doc):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _load(args, attr):
    path = getattr(args, attr)
    if not os.path.isfile(path):
        raise FileNotFoundError(f"data file not found: {path}")
    return load_csv(path, args.inputs, args.output_col, args.noise_col)


def _options(args):
    spec = CorrelationSpec(args.family, args.structure, args.isotropic)
    return spec, TrendSpec.from_label(args.trend), Estimation(args.estimation), \
        OptimizerSpec(args.optimizer)


def _fit_report(model) -> dict:
    top = model.top if isinstance(model, HierarchicalModel) else model
    doc = {
        "theta": [float(t) for t in top.theta],
        "beta": [float(b) for b in top.beta],
        "sigma2": float(top.sigma2),
        "sigma2_original": top.sigma2_original,
        "jitter": float(top.corr.jitter),
        "n": top.n,
        "d": top.d,
        **top.info,
    }
    if isinstance(model, HierarchicalModel):
        doc["beta_scale"] = model.beta_scale
    return doc


def cmd_fit(args):
    data = _load(args, "data")
    spec, trend, est, opt = _options(args)
    model = fit(data, spec, trend, est, opt, args.seed)
    out = _out_dir(args.out)
    io.save_model(model, os.path.join(out, "model.json"))
    _write_json(os.path.join(out, "fit_report.json"), _fit_report(model))
    return EXIT_OK


def cmd_hfit(args):
    lf_data = _load(args, "lf_data")
    hf_data = _load(args, "hf_data")
    pair = FidelityPair(lf_data, hf_data)
    spec, trend, est, opt = _options(args)
    lf = fit(pair.lf, spec, trend, est, opt, args.seed)
    model = fit_hierarchical(lf, pair.hf, spec, est, opt, args.seed)
    out = _out_dir(args.out)
    io.save_model(model, os.path.join(out, "model.json"))
    _write_json(os.path.join(out, "fit_report.json"), _fit_report(model))
    print(f"beta_scale={model.beta_scale!r}")
    return EXIT_OK


def parse_grid(text: str, d: int) -> np.ndarray:
    """``'0:1:101'`` (per dimension, comma separated) to a lattice of points."""
    parts = text.split(",")
    if len(parts) != d:
        raise UsageError(f"grid has {len(parts)} dimensions, model has {d}")
    axes = []
    for part in parts:
        bits = part.split(":")
        if len(bits) != 3:
            raise UsageError(f"malformed grid component {part!r}; expected min:max:count")
        try:
            lo, hi, count = float(bits[0]), float(bits[1]), int(bits[2])
        except ValueError:
            raise UsageError(f"malformed grid component {part!r}") from None
        if count < 1 or not (np.isfinite(lo) and np.isfinite(hi)):
            raise UsageError(f"malformed grid component {part!r}")
        axes.append(np.linspace(lo, hi, count))
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([m.ravel() for m in mesh])


def _read_query(path, names):
    if not os.path.isfile(path):
        raise FileNotFoundError(f"query file not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DataError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    missing = [n for n in names if n not in header]
    if missing:
        raise ShapeError(f"{path}: query lacks model input columns {missing}")
    idx = [header.index(n) for n in names]
    try:
        return np.array([[float(r[i]) for i in idx] for r in rows[1:] if r], dtype=float)
    except (ValueError, IndexError) as exc:
        raise DataError(f"{path}: non-numeric query value ({exc})") from None


def cmd_predict(args):
    model = io.load_model(args.model)
    top = model.top if isinstance(model, HierarchicalModel) else model
    names = list(args.inputs or top.data.input_names)
    if args.grid is not None:
        X = parse_grid(args.grid, top.d)
    else:
        X = _read_query(args.query, names)
    pred = model.predict(X.reshape(-1, top.d))
    out = _out_dir(args.out)
    with open(os.path.join(out, "predictions.csv"), "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names + ["mean", "variance"])
        for x, m, v in zip(X, pred.mean, pred.variance):
            w.writerow([repr(float(t)) for t in x] + [repr(float(m)), repr(float(v))])
    return EXIT_OK


def _workers(args) -> int:
    if args.workers is not None:
        n = args.workers
    else:
        try:
            n = int(os.environ.get(WORKERS_ENV, "1"))
        except ValueError:
            raise UsageError(f"${WORKERS_ENV} must be an integer") from None
    if n < 1:
        raise UsageError("--workers must be at least 1")
    return n


def cmd_sweep(args):
    try:
        grid = CombinationGrid.from_restrictions(args.grid)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    workers = _workers(args)
    mode = Mode(args.mode)
    if mode is Mode.HIERARCHICAL and not args.lf_data:
        raise UsageError("hierarchical sweep needs --lf-data")
    hf = _load(args, "hf_data")
    val = _load(args, "validate")
    lf = _load(args, "lf_data") if args.lf_data else None
    if lf is not None:
        FidelityPair(lf, hf)
    shared = None
    if args.shared_lf and mode is Mode.HIERARCHICAL:
        shared = fit(lf, CorrelationSpec(), TrendSpec.ordinary(), Estimation.MLE,
                     OptimizerSpec(), args.seed)
    rows = run_sweep(grid, hf, val, lf, mode, args.seed, workers, shared_lf=shared)
    out = _out_dir(args.out)
    write_report(rows, os.path.join(out, "sweep.json"), os.path.join(out, "sweep.csv"),
                 mode, args.seed)
    write_timings(rows, os.path.join(out, "sweep_timings.csv"))
    try:
        for crit, name in ((Criterion.Q2, "best_q2_model.json"), (Criterion.MAE, "best_mae_model.json")):
            io.save_model(select_best(rows, crit).model, os.path.join(out, name))
    except NoModelError as exc:
        raise FitError(f"all {len(rows)} combinations failed; see sweep.csv") from exc
    n_ok = sum(r.ok for r in rows)
    print(f"{n_ok}/{len(rows)} combinations fitted")
    return EXIT_OK


def _thresholds(items):
    out = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"threshold must look like key=value: {item!r}")
        try:
            out[key.strip()] = float(value)
        except ValueError:
            raise UsageError(f"threshold value must be numeric: {item!r}") from None
    return out


def cmd_bench(args):
    th = _thresholds(args.threshold)
    if args.seeds < 1:
        raise UsageError("--seeds must be at least 1")
    seeds = range(args.seed, args.seed + args.seeds)
    allowed = bench.FORRESTER_THRESHOLDS if args.name == "forrester" else bench.SYNTHETIC_THRESHOLDS
    unknown = set(th) - set(allowed)
    if unknown:
        raise UsageError(f"unknown thresholds {sorted(unknown)}; choose from {sorted(allowed)}")
    out = _out_dir(args.out)
    if args.name == "forrester":
        report = bench.forrester_benchmark(seeds, th)
        for key, model in report.pop("_models").items():
            io.save_model(model, os.path.join(out, f"forrester_{key}_model.json"))
    else:
        reports = [bench.synthetic_benchmark(s, workers=_workers(args), thresholds=th)
                   for s in seeds]
        for r in reports:
            r.pop("_rows")
        report = {"benchmark": "synthetic3d", "runs": reports,
                  "passed": all(r["passed"] for r in reports)}
    _write_json(os.path.join(out, "bench_report.json"), report)
    print(f"{args.name}: {'PASS' if report['passed'] else 'FAIL'}")
    return EXIT_OK if report["passed"] else EXIT_THRESHOLD


def cmd_data(args):
    out = _out_dir(args.out)
    if args.name == "forrester":
        pair = forrester_doe()
        x = np.linspace(0.0, 1.0, 101)
        validate = Dataset(x[:, None], forrester_hf(x))
        save_csv(os.path.join(out, "forrester_lf.csv"), pair.lf)
        save_csv(os.path.join(out, "forrester_hf.csv"), pair.hf)
        save_csv(os.path.join(out, "forrester_validate.csv"), validate)
    else:
        lf, train, validate = bench.synthetic_split(args.seed)
        save_csv(os.path.join(out, "synthetic3d_lf.csv"), lf)
        save_csv(os.path.join(out, "synthetic3d_hf.csv"), train)
        save_csv(os.path.join(out, "synthetic3d_validate.csv"), validate)
    return EXIT_OK


COMMANDS = {"fit": cmd_fit, "hfit": cmd_hfit, "predict": cmd_predict,
            "sweep": cmd_sweep, "bench": cmd_bench, "data": cmd_data}


def _error(code, exc, out=None):
    doc = {"error": type(exc).__name__, "message": str(exc), "exit_status": code}
    print(json.dumps(doc, sort_keys=True), file=sys.stderr)
    if out and os.path.isdir(out):
        _write_json(os.path.join(out, "error.json"), doc)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out = getattr(args, "out", None)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        return _error(EXIT_USAGE, exc)
    except (FitError, NoModelError) as exc:
        return _error(EXIT_FIT, exc, out)
    except (FileNotFoundError, DataError, ShapeError, KrigingError) as exc:
        return _error(EXIT_DATA, exc, out)


if __name__ == "__main__":
    sys.exit(main())

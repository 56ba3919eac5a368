"""Parametric sweep over Kriging options, validation metrics and best-model choice."""

from __future__ import annotations

import csv
import itertools
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import NamedTuple

import numpy as np

from .data import Dataset
from .errors import DegenerateValidationError, KrigingError, NoModelError, ShapeError
from .gp import Estimation, fit
from .hierarchical import fit_hierarchical
from .kernels import CorrelationSpec, Family, Structure
from .optimize import Method, OptimizerSpec
from .trend import TrendSpec

REPORT_SCHEMA_VERSION = 1


class Mode(str, Enum):
    HIERARCHICAL = "hierarchical"
    CONVENTIONAL = "conventional"


class Criterion(str, Enum):
    Q2 = "Q2"
    MAE = "MAE"


class Combination(NamedTuple):
    structure: Structure
    family: Family
    isotropic: bool
    trend: str
    estimation: Estimation
    optimizer: Method

    @property
    def correlation(self) -> CorrelationSpec:
        return CorrelationSpec(self.family, self.structure, self.isotropic)

    @property
    def trend_spec(self) -> TrendSpec:
        return TrendSpec.from_label(self.trend)

    def labels(self) -> list:
        return [self.structure.value, self.family.value, str(self.isotropic).lower(),
                self.trend, self.estimation.value, self.optimizer.value]


AXES = ("structure", "family", "isotropic", "trend", "estimation", "optimizer")
DEFAULT_TRENDS = ("Ordinary", "Polynomial1", "Polynomial2", "Polynomial3", "Polynomial4")


@dataclass(frozen=True)
class CombinationGrid:
    """Candidate values per option axis; enumeration follows this field order."""

    structure: tuple = tuple(Structure)
    family: tuple = tuple(Family)
    isotropic: tuple = (True, False)
    trend: tuple = DEFAULT_TRENDS
    estimation: tuple = tuple(Estimation)
    optimizer: tuple = (Method.HYBRID_DE, Method.HYBRID_GA, Method.LOCAL_GRADIENT)

    def __post_init__(self):
        conv = {
            "structure": Structure, "family": Family, "isotropic": _parse_bool,
            "trend": lambda t: TrendSpec.from_label(t).label,
            "estimation": Estimation, "optimizer": Method,
        }
        for axis in AXES:
            values = tuple(conv[axis](v) for v in getattr(self, axis))
            if not values:
                raise ValueError(f"grid axis {axis!r} is empty")
            object.__setattr__(self, axis, values)

    def __len__(self):
        return math.prod(len(getattr(self, a)) for a in AXES)

    def restrict(self, **axes) -> "CombinationGrid":
        """Copy with some axes replaced, e.g. ``restrict(family=["Gaussian"])``."""
        for k in axes:
            if k not in AXES:
                raise ValueError(f"unknown grid axis {k!r}; choose from {AXES}")
        return replace(self, **{k: tuple(v) for k, v in axes.items()})

    @classmethod
    def from_restrictions(cls, items) -> "CombinationGrid":
        """Parse ``["family=Gaussian,Linear", "trend=Ordinary"]`` style restrictions."""
        axes = {}
        for item in items or ():
            key, sep, value = item.partition("=")
            if not sep or not value:
                raise ValueError(f"grid restriction must look like axis=value[,value]: {item!r}")
            axes[key.strip()] = [v.strip() for v in value.split(",")]
        return cls().restrict(**axes)


def _parse_bool(v) -> bool:
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    s = str(v).strip().lower()
    if s in ("true", "1", "yes"):
        return True
    if s in ("false", "0", "no"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


def enumerate_combinations(grid: CombinationGrid | None = None) -> list:
    """All option tuples, structure outermost and optimizer innermost.

    Combination number k (1-based) is ``result[k - 1]``.
    """
    grid = grid or CombinationGrid()
    return [Combination(*c) for c in itertools.product(*(getattr(grid, a) for a in AXES))]


# ---------------------------------------------------------------------------
# Validation metrics
# ---------------------------------------------------------------------------


def _pair(y_true, y_pred):
    y_true = np.asarray(y_true, dtype=float).reshape(-1)
    y_pred = np.asarray(y_pred, dtype=float).reshape(-1)
    if y_true.shape != y_pred.shape:
        raise ShapeError(f"length mismatch: {y_true.size} vs {y_pred.size}")
    if y_true.size < 2:
        raise DegenerateValidationError("need at least 2 validation points")
    return y_true, y_pred


def q2(y_true, y_pred) -> float:
    """Predictive coefficient 1 - SSE / sum((y - mean(y))^2); can be negative."""
    y_true, y_pred = _pair(y_true, y_pred)
    denom = float(np.sum((y_true - np.mean(y_true)) ** 2))
    if denom == 0.0:
        raise DegenerateValidationError("validation responses are constant")
    return 1.0 - float(np.sum((y_true - y_pred) ** 2)) / denom


def mae(y_true, y_pred) -> float:
    """Largest absolute error divided by the validation output range."""
    y_true, y_pred = _pair(y_true, y_pred)
    span = float(np.max(y_true) - np.min(y_true))
    if span == 0.0:
        raise DegenerateValidationError("validation responses have zero range")
    return float(np.max(np.abs(y_true - y_pred))) / span


# ---------------------------------------------------------------------------
# Sweep
# ---------------------------------------------------------------------------


@dataclass
class SweepResult:
    index: int
    combination: Combination
    seed: int
    status: str = "ok"
    reason: str = ""
    q2: float | None = None
    mae: float | None = None
    fit_seconds: float = 0.0
    score_seconds: float = 0.0
    diagnostics: dict = field(default_factory=dict)
    model: object = field(default=None, repr=False)

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "options": dict(zip(AXES, self.combination.labels())),
            "seed": self.seed,
            "status": self.status,
            "reason": self.reason,
            "q2": self.q2,
            "mae": self.mae,
            "diagnostics": self.diagnostics,
        }


@dataclass(frozen=True)
class _Task:
    index: int
    combination: Combination
    seed: int
    mode: Mode
    train_hf: Dataset
    validate: Dataset
    train_lf: Dataset | None
    shared_lf: object
    optimizer: OptimizerSpec
    keep_model: bool


def _fit_combination(task: _Task):
    c = task.combination
    opt = replace(task.optimizer, method=c.optimizer)
    if task.mode is Mode.CONVENTIONAL:
        return fit(task.train_hf, c.correlation, c.trend_spec, c.estimation, opt, task.seed)
    lf = task.shared_lf
    if lf is None:
        lf = fit(task.train_lf, c.correlation, c.trend_spec, c.estimation, opt, task.seed)
    return fit_hierarchical(lf, task.train_hf, c.correlation, c.estimation, opt, task.seed)


def _run_task(task: _Task) -> SweepResult:
    out = SweepResult(task.index, task.combination, task.seed)
    t0 = time.perf_counter()
    try:
        model = _fit_combination(task)
    except (KrigingError, ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        out.fit_seconds = time.perf_counter() - t0
        out.status, out.reason = "failed", f"{type(exc).__name__}: {exc}"
        return out
    t1 = time.perf_counter()
    out.fit_seconds = t1 - t0
    top = getattr(model, "top", model)
    out.diagnostics = {
        "theta": [float(t) for t in top.theta],
        "beta": [float(b) for b in top.beta],
        "sigma2": float(top.sigma2_original),
        "objective": top.info.get("objective"),
        "jitter": float(top.corr.jitter),
    }
    pred = model.predict(task.validate.X).mean
    if not np.all(np.isfinite(pred)):
        out.status, out.reason = "failed", "non-finite validation predictions"
    else:
        out.q2 = q2(task.validate.Y, pred)
        out.mae = mae(task.validate.Y, pred)
        if task.keep_model:
            out.model = model
    out.score_seconds = time.perf_counter() - t1
    return out


def combination_seed(base_seed: int, index: int) -> int:
    return int(base_seed) ^ int(index)


def run_sweep(grid: CombinationGrid | None, train_hf: Dataset, validate: Dataset,
              train_lf: Dataset | None = None, mode=Mode.HIERARCHICAL, base_seed: int = 0,
              workers: int = 1, optimizer: OptimizerSpec | None = None,
              shared_lf=None, keep_models: bool = True) -> list:
    """Fit and score every grid combination; rows come back in enumeration order.

    In hierarchical mode the low-fidelity model is refit for every combination
    with that combination's options, unless ``shared_lf`` (an already fitted
    model) is supplied.  Failures are recorded per row, never raised.
    """
    mode = Mode(mode)
    if mode is Mode.HIERARCHICAL and train_lf is None and shared_lf is None:
        raise ValueError("hierarchical sweep needs low-fidelity training data")
    if validate.n < 2:
        raise DegenerateValidationError("need at least 2 validation points")
    if np.ptp(validate.Y) == 0.0:
        raise DegenerateValidationError("validation responses are constant")
    combos = enumerate_combinations(grid)
    optimizer = optimizer or OptimizerSpec()
    tasks = [
        _Task(i, c, combination_seed(base_seed, i), mode, train_hf, validate, train_lf,
              shared_lf, optimizer, keep_models)
        for i, c in enumerate(combos, start=1)
    ]
    if workers <= 1:
        return [_run_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_task, tasks, chunksize=max(1, len(tasks) // (8 * workers))))


def select_best(results, criterion=Criterion.Q2) -> SweepResult:
    """Best successful row: max Q2 or min MAE, ties broken by the other metric, then index."""
    criterion = Criterion(criterion)
    ok = [r for r in results if r.ok]
    if not ok:
        raise NoModelError("every combination failed; nothing to select")
    if criterion is Criterion.Q2:
        return min(ok, key=lambda r: (-r.q2, r.mae, r.index))
    return min(ok, key=lambda r: (r.mae, -r.q2, r.index))


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

CSV_COLUMNS = ["index", *AXES, "q2", "mae", "status", "reason"]


def _fmt(v):
    return "" if v is None else repr(float(v))


def report_dict(results, mode=None, base_seed=None) -> dict:
    rows = [r.to_dict() for r in results]
    doc = {"schema_version": REPORT_SCHEMA_VERSION, "n_combinations": len(rows),
           "n_ok": sum(r.ok for r in results), "rows": rows}
    if mode is not None:
        doc["mode"] = Mode(mode).value
    if base_seed is not None:
        doc["base_seed"] = int(base_seed)
    ok = [r for r in results if r.ok]
    if ok:
        doc["best"] = {c.value: select_best(results, c).index for c in Criterion}
    return doc


def write_report(results, json_path, csv_path, mode=None, base_seed=None) -> None:
    """Structured (JSON) and flat (CSV) sweep reports, free of wall-clock data."""
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(report_dict(results, mode, base_seed), fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in results:
            w.writerow([r.index, *r.combination.labels(), _fmt(r.q2), _fmt(r.mae),
                        r.status, r.reason])


def write_timings(results, csv_path) -> None:
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "fit_seconds", "score_seconds", "seconds"])
        for r in results:
            w.writerow([r.index, f"{r.fit_seconds:.6f}", f"{r.score_seconds:.6f}",
                        f"{r.fit_seconds + r.score_seconds:.6f}"])

"""Datasets, replicate aggregation, standardization and analytical benchmarks."""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConstantInputError,
    EmptyDatasetError,
    ParseError,
    SchemaError,
    ShapeError,
)


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Dataset:
    """Design matrix, responses and per-point noise variances (original units).

    ``noise_var`` is the variance of each response value, so for a point that
    aggregates m replicates it is the variance of their mean.
    """

    X: np.ndarray
    Y: np.ndarray
    noise_var: np.ndarray = None
    replication_counts: np.ndarray = None
    input_names: tuple = ()
    output_name: str = "y"

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        Y = np.asarray(self.Y, dtype=float).reshape(-1)
        if X.ndim != 2 or X.shape[0] != Y.shape[0]:
            raise ShapeError(f"X rows ({X.shape}) and Y length ({Y.shape}) differ")
        n, d = X.shape
        noise = np.zeros(n) if self.noise_var is None else np.asarray(self.noise_var, float)
        if noise.shape != (n,):
            raise ShapeError(f"noise_var must have length {n}")
        object.__setattr__(self, "X", _frozen(X))
        object.__setattr__(self, "Y", _frozen(Y))
        object.__setattr__(self, "noise_var", _frozen(noise))
        if self.replication_counts is not None:
            object.__setattr__(
                self, "replication_counts", _frozen(self.replication_counts, dtype=int)
            )
        names = tuple(self.input_names) or tuple(f"x{q + 1}" for q in range(d))
        if len(names) != d:
            raise ShapeError(f"{len(names)} input names for {d} input columns")
        object.__setattr__(self, "input_names", names)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    def subset(self, mask) -> "Dataset":
        mask = np.asarray(mask)
        reps = None if self.replication_counts is None else self.replication_counts[mask]
        return Dataset(
            self.X[mask], self.Y[mask], self.noise_var[mask], reps,
            self.input_names, self.output_name,
        )

    def to_dict(self) -> dict:
        doc = {
            "input_names": list(self.input_names),
            "output_name": self.output_name,
            "X": self.X.tolist(),
            "Y": self.Y.tolist(),
            "noise_var": self.noise_var.tolist(),
        }
        if self.replication_counts is not None:
            doc["replication_counts"] = self.replication_counts.tolist()
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "Dataset":
        X = np.array(doc["X"], dtype=float).reshape(len(doc["Y"]), -1)
        return cls(
            X, doc["Y"], doc["noise_var"], doc.get("replication_counts"),
            tuple(doc["input_names"]), doc["output_name"],
        )


@dataclass(frozen=True)
class FidelityPair:
    lf: Dataset
    hf: Dataset

    def __post_init__(self):
        if self.lf.d != self.hf.d:
            raise ShapeError(
                f"low-fidelity inputs have d={self.lf.d}, high-fidelity d={self.hf.d}"
            )


def aggregate_replicates(X, Y, noise_var=None, input_names=(), output_name="y") -> Dataset:
    """Collapse rows with identical inputs into one point per unique input.

    The response of a unique point is the mean of its replicates.  Its noise
    variance is the unbiased sample variance of the replicates divided by the
    replicate count (variance of the mean); single replicates get 0.  When an
    explicit per-row ``noise_var`` is supplied it takes precedence, and the
    per-point value is mean(noise_var) / m.

    Rows are sorted by (inputs, output) before grouping, so the result does not
    depend on input row order.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    Y = np.asarray(Y, dtype=float).reshape(-1)
    if X.shape[0] != Y.shape[0]:
        raise ShapeError("X and Y have different row counts")
    if X.shape[0] == 0:
        raise EmptyDatasetError("no data rows")
    explicit = None if noise_var is None else np.asarray(noise_var, dtype=float).reshape(-1)

    keys = [Y] if explicit is None else [explicit, Y]
    order = np.lexsort(keys + [X[:, q] for q in reversed(range(X.shape[1]))])
    Xs, Ys = X[order], Y[order]
    Ns = None if explicit is None else explicit[order]

    new_group = np.ones(len(Ys), dtype=bool)
    new_group[1:] = np.any(Xs[1:] != Xs[:-1], axis=1)
    starts = np.flatnonzero(new_group)
    ends = np.append(starts[1:], len(Ys))

    Xu, Yu, Vu, counts = [], [], [], []
    for s, e in zip(starts, ends):
        m = e - s
        vals = Ys[s:e]
        Xu.append(Xs[s])
        Yu.append(float(np.mean(vals)))
        if Ns is not None:
            Vu.append(float(np.mean(Ns[s:e])) / m)
        elif m > 1:
            Vu.append(float(np.var(vals, ddof=1)) / m)
        else:
            Vu.append(0.0)
        counts.append(m)
    return Dataset(np.array(Xu), np.array(Yu), np.array(Vu), np.array(counts),
                   tuple(input_names), output_name)


def load_csv(path, inputs=None, output="y", noise_col=None) -> Dataset:
    """Read a comma-separated file with a header row.

    ``inputs`` lists the input column names; by default every column named
    ``x<k>`` is used, ordered by k.  Duplicate input rows are aggregated as
    replications (see :func:`aggregate_replicates`).
    """
    path = os.fspath(path)
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise EmptyDatasetError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    body = [r for r in rows[1:] if any(c.strip() for c in r)]
    if inputs is None:
        xcols = [h for h in header if h.startswith("x") and h[1:].isdigit()]
        inputs = sorted(xcols, key=lambda h: int(h[1:]))
        if not inputs:
            raise SchemaError(f"{path}: no input columns named x1..xd")
    inputs = list(inputs)
    wanted = inputs + [output] + ([noise_col] if noise_col else [])
    for name in wanted:
        if name not in header:
            raise SchemaError(f"{path}: missing column {name!r}")
    if not body:
        raise EmptyDatasetError(f"{path}: no data rows")
    idx = [header.index(name) for name in wanted]
    values = np.empty((len(body), len(wanted)))
    for i, row in enumerate(body):
        for j, (col, name) in enumerate(zip(idx, wanted)):
            try:
                v = float(row[col])
            except (ValueError, IndexError):
                cell = row[col] if col < len(row) else ""
                raise ParseError(
                    f"{path}: row {i + 2}, column {name!r}: cannot parse {cell!r}"
                ) from None
            if not math.isfinite(v):
                raise ParseError(f"{path}: row {i + 2}, column {name!r}: non-finite value")
            values[i, j] = v
    d = len(inputs)
    noise = values[:, d + 1] if noise_col else None
    return aggregate_replicates(values[:, :d], values[:, d], noise, tuple(inputs), output)


def save_csv(path, data: Dataset) -> None:
    """Write one row per point; noise variance goes in a ``noise_var`` column."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(list(data.input_names) + [data.output_name, "noise_var"])
        for x, y, v in zip(data.X, data.Y, data.noise_var):
            w.writerow([repr(float(t)) for t in x] + [repr(float(y)), repr(float(v))])


@dataclass(frozen=True)
class Transform:
    """Affine maps between original and standardized units.

    Inputs: ``(x - x_min) / x_scale``, so the training range maps to [0, 1].
    Outputs: ``(y - y_shift) / y_scale``.  ``y_scale`` is the population
    standard deviation (divisor n) of the training responses, or 1 if that
    is zero.
    """

    x_min: np.ndarray
    x_scale: np.ndarray
    y_shift: float
    y_scale: float

    def __post_init__(self):
        object.__setattr__(self, "x_min", _frozen(self.x_min))
        object.__setattr__(self, "x_scale", _frozen(self.x_scale))
        object.__setattr__(self, "y_shift", float(self.y_shift))
        object.__setattr__(self, "y_scale", float(self.y_scale))

    @classmethod
    def fit(cls, data: Dataset, center_output: bool = True) -> "Transform":
        if data.n < 1:
            raise EmptyDatasetError("cannot standardize an empty dataset")
        lo = data.X.min(axis=0)
        span = data.X.max(axis=0) - lo
        for q, s in enumerate(span):
            if s == 0.0:
                raise ConstantInputError(
                    f"input {data.input_names[q]!r} is constant; cannot scale it"
                )
        shift = float(np.mean(data.Y)) if center_output else 0.0
        sd = float(np.std(data.Y))
        return cls(lo, span, shift, sd if sd > 0.0 else 1.0)

    def x_forward(self, X):
        return (np.asarray(X, dtype=float) - self.x_min) / self.x_scale

    def x_inverse(self, U):
        return np.asarray(U, dtype=float) * self.x_scale + self.x_min

    def y_forward(self, Y):
        return (np.asarray(Y, dtype=float) - self.y_shift) / self.y_scale

    def y_inverse(self, Z):
        return np.asarray(Z, dtype=float) * self.y_scale + self.y_shift

    def var_forward(self, V):
        return np.asarray(V, dtype=float) / self.y_scale**2

    def var_inverse(self, V):
        return np.asarray(V, dtype=float) * self.y_scale**2

    def to_dict(self) -> dict:
        return {
            "x_min": self.x_min.tolist(),
            "x_scale": self.x_scale.tolist(),
            "y_shift": self.y_shift,
            "y_scale": self.y_scale,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Transform":
        return cls(doc["x_min"], doc["x_scale"], doc["y_shift"], doc["y_scale"])


def standardize(data: Dataset, center_output: bool = True):
    """Return ``(standardized dataset, Transform)``."""
    t = Transform.fit(data, center_output)
    out = Dataset(
        t.x_forward(data.X), t.y_forward(data.Y), t.var_forward(data.noise_var),
        data.replication_counts, data.input_names, data.output_name,
    )
    return out, t


def destandardize(data: Dataset, t: Transform) -> Dataset:
    return Dataset(
        t.x_inverse(data.X), t.y_inverse(data.Y), t.var_inverse(data.noise_var),
        data.replication_counts, data.input_names, data.output_name,
    )


# ---------------------------------------------------------------------------
# Analytical benchmarks
# ---------------------------------------------------------------------------

FORRESTER_A = 0.5
FORRESTER_B = 10.0
FORRESTER_C = -5.0
FORRESTER_D1 = tuple(np.round(np.linspace(0.0, 1.0, 11), 12))
FORRESTER_D2 = (0.0, 0.4, 0.6, 1.0)


def forrester_hf(x):
    """High-fidelity Forrester function (6x - 2)^2 sin(12x - 4)."""
    x = np.asarray(x, dtype=float)
    return (6.0 * x - 2.0) ** 2 * np.sin(12.0 * x - 4.0)


def forrester_lf(x):
    """Low-fidelity Forrester function A*y_hf + B(x - 0.5) - C."""
    x = np.asarray(x, dtype=float)
    return FORRESTER_A * forrester_hf(x) + FORRESTER_B * (x - 0.5) - FORRESTER_C


def forrester_doe() -> FidelityPair:
    """Noise-free LF data on 11 equispaced points and HF data on {0, .4, .6, 1}."""
    d1 = np.array(FORRESTER_D1)
    d2 = np.array(FORRESTER_D2)
    lf = Dataset(d1[:, None], forrester_lf(d1), replication_counts=np.ones(d1.size, int))
    hf = Dataset(d2[:, None], forrester_hf(d2), replication_counts=np.ones(d2.size, int))
    return FidelityPair(lf, hf)


# Synthetic 3-input stand-in for replicated load data: wind speed,
# turbulence and shear exponent, with LF and HF sharing the same trends.
SYNTH_NAMES = ("wind_speed", "turbulence", "shear")
SYNTH_LOWER = np.array([4.0, 0.5, -0.2])
SYNTH_UPPER = np.array([25.0, 3.0, 0.4])
SYNTH_HF_LEVELS = np.linspace(SYNTH_LOWER[0], SYNTH_UPPER[0], 7)


def _unit(X):
    return (np.asarray(X, dtype=float) - SYNTH_LOWER) / (SYNTH_UPPER - SYNTH_LOWER)


def synthetic_lf(X):
    """Low-fidelity closed form on the synthetic box.

    With u the inputs rescaled to [0, 1]^3:
    1.5 sin(2 pi u1 + 0.5) + u2 (1 + u1) + 0.5 u3^2 + u2 u3.
    """
    u = _unit(np.atleast_2d(X))
    u1, u2, u3 = u[:, 0], u[:, 1], u[:, 2]
    return 1.5 * np.sin(2.0 * np.pi * u1 + 0.5) + u2 * (1.0 + u1) + 0.5 * u3**2 + u2 * u3


def synthetic_hf(X):
    """High-fidelity closed form: 1.3 * LF + 0.4 u2 - 0.3 u3 + 0.2."""
    u = _unit(np.atleast_2d(X))
    return 1.3 * synthetic_lf(X) + 0.4 * u[:, 1] - 0.3 * u[:, 2] + 0.2


def synthetic_noise_sd(X, noise_scale):
    """Replicate noise standard deviation, growing with wind speed."""
    u = _unit(np.atleast_2d(X))
    return noise_scale * (0.2 + u[:, 0])


def synthetic_3d_pair(n_lf=60, n_hf=63, noise_scale=0.1, seed=0,
                      lf_replications=24, hf_replications=12) -> FidelityPair:
    """Deterministic replicated, heteroscedastic LF/HF data on a 3-D box.

    LF points are uniform in the box.  HF wind speeds cycle through seven
    levels (``SYNTH_HF_LEVELS``) so the HF design can be split into slices;
    the other two HF inputs are uniform.  Every point is replicated and each
    replicate gets Gaussian noise with sd ``synthetic_noise_sd``.
    """
    if n_lf < 4 or n_hf < 4:
        raise ValueError("need at least 4 LF and 4 HF points")
    if noise_scale < 0:
        raise ValueError("noise_scale must be non-negative")
    rng = np.random.default_rng(seed)
    span = SYNTH_UPPER - SYNTH_LOWER
    X_lf = SYNTH_LOWER + span * rng.random((n_lf, 3))
    X_hf = SYNTH_LOWER + span * rng.random((n_hf, 3))
    X_hf[:, 0] = SYNTH_HF_LEVELS[np.arange(n_hf) % SYNTH_HF_LEVELS.size]

    def replicate(X, f, m):
        Xr = np.repeat(X, m, axis=0)
        Yr = f(Xr)
        if noise_scale > 0:
            Yr = Yr + synthetic_noise_sd(Xr, noise_scale) * rng.standard_normal(Yr.size)
        return aggregate_replicates(Xr, Yr, input_names=SYNTH_NAMES, output_name="load")

    lf = replicate(X_lf, synthetic_lf, lf_replications)
    hf = replicate(X_hf, synthetic_hf, hf_replications)
    return FidelityPair(lf, hf)


def split_by_levels(data: Dataset, dim: int, levels):
    """Split into (points whose input ``dim`` is in ``levels``, the rest)."""
    mask = np.isin(data.X[:, dim], np.asarray(levels, dtype=float))
    return data.subset(mask), data.subset(~mask)

"""Self-checking end-to-end benchmarks.

``forrester`` fits LF ordinary Kriging on 11 points, Hierarchical Kriging on
4 HF points and conventional ordinary Kriging on the same 4 points, then
scores both against the exact HF function on a 101-point grid.

``synthetic3d`` runs hierarchical and conventional sweeps over a 60-combination
sub-grid on replicated, heteroscedastic 3-input data whose HF training set
holds only three wind-speed slices.
"""

from __future__ import annotations

import math

import numpy as np

from .data import (
    SYNTH_HF_LEVELS,
    forrester_doe,
    forrester_hf,
    split_by_levels,
    synthetic_3d_pair,
)
from .gp import Estimation, fit
from .hierarchical import fit_hierarchical
from .kernels import CorrelationSpec, Family
from .optimize import OptimizerSpec
from .selection import CombinationGrid, Mode, mae, q2, run_sweep

FORRESTER_THRESHOLDS = {
    "max_rmse_ratio": 1.0 / 3.0,  # HK RMSE / conventional RMSE
    "beta_low": 1.8,
    "beta_high": 2.2,
}

SYNTHETIC_THRESHOLDS = {
    "min_win_fraction": 0.8,  # share of combinations where HK Q2 > conventional Q2
}

SYNTHETIC_SUBGRID = CombinationGrid().restrict(
    trend=["Ordinary", "Polynomial1", "Polynomial2"],
    estimation=["MLE"],
    optimizer=["HybridDE"],
)
SYNTHETIC_TRAIN_SLICES = SYNTH_HF_LEVELS[[0, 3, 6]]


def rmse(y_true, y_pred) -> float:
    d = np.asarray(y_true, dtype=float) - np.asarray(y_pred, dtype=float)
    return float(np.sqrt(np.mean(d * d)))


def _scores(y_true, y_pred) -> dict:
    return {"rmse": rmse(y_true, y_pred), "q2": q2(y_true, y_pred), "mae": mae(y_true, y_pred)}


def forrester_run(seed: int = 0, family=Family.GAUSSIAN, estimation=Estimation.MLE,
                  optimizer: OptimizerSpec | None = None, n_grid: int = 101) -> dict:
    """One Forrester comparison; returns scores and fitted quantities."""
    pair = forrester_doe()
    spec = CorrelationSpec(family)
    lf = fit(pair.lf, spec, None, estimation, optimizer, seed)
    hk = fit_hierarchical(lf, pair.hf, spec, estimation, optimizer, seed)
    conv = fit(pair.hf, spec, None, estimation, optimizer, seed)
    x = np.linspace(0.0, 1.0, n_grid)
    y = forrester_hf(x)
    return {
        "seed": int(seed),
        "hierarchical": _scores(y, hk.predict(x).mean),
        "conventional": _scores(y, conv.predict(x).mean),
        "beta": hk.beta_scale,
        "theta_hf": [float(t) for t in hk.top.theta],
        "sigma2_hf": hk.top.sigma2_original,
        "theta_lf": [float(t) for t in lf.theta],
        "models": {"lf": lf, "hierarchical": hk, "conventional": conv},
    }


def forrester_benchmark(seeds=(0,), thresholds=None, **kwargs) -> dict:
    """Run the Forrester comparison for each seed and check the thresholds."""
    th = dict(FORRESTER_THRESHOLDS, **(thresholds or {}))
    runs = [forrester_run(s, **kwargs) for s in seeds]
    checks = []
    for r in runs:
        ratio = r["hierarchical"]["rmse"] / r["conventional"]["rmse"]
        r["rmse_ratio"] = ratio
        checks.append(ratio <= th["max_rmse_ratio"])
        checks.append(th["beta_low"] <= r["beta"] <= th["beta_high"])
    hk_rmse = [r["hierarchical"]["rmse"] for r in runs]
    return {
        "benchmark": "forrester",
        "thresholds": th,
        "runs": [{k: v for k, v in r.items() if k != "models"} for r in runs],
        "hk_rmse_spread": float(max(hk_rmse) - min(hk_rmse)),
        "passed": bool(all(checks)),
        "_models": runs[0]["models"],
    }


def synthetic_split(seed: int = 0, n_lf: int = 80, n_hf: int = 63, noise_scale: float = 0.3):
    """(LF training, HF training on three wind-speed slices, HF validation)."""
    pair = synthetic_3d_pair(n_lf, n_hf, noise_scale, seed)
    train, validate = split_by_levels(pair.hf, 0, SYNTHETIC_TRAIN_SLICES)
    return pair.lf, train, validate


def _q2_column(rows):
    return np.array([r.q2 if r.ok else np.nan for r in rows])


def synthetic_benchmark(seed: int = 0, grid: CombinationGrid | None = None, workers: int = 1,
                        thresholds=None, **split_kwargs) -> dict:
    th = dict(SYNTHETIC_THRESHOLDS, **(thresholds or {}))
    grid = grid or SYNTHETIC_SUBGRID
    lf, train, validate = synthetic_split(seed, **split_kwargs)
    hk_rows = run_sweep(grid, train, validate, lf, Mode.HIERARCHICAL, seed, workers,
                        keep_models=False)
    cv_rows = run_sweep(grid, train, validate, None, Mode.CONVENTIONAL, seed, workers,
                        keep_models=False)
    hq, cq = _q2_column(hk_rows), _q2_column(cv_rows)
    # a failed row never wins
    wins = np.nan_to_num(hq, nan=-np.inf) > np.nan_to_num(cq, nan=-np.inf)
    win_fraction = float(np.mean(wins))

    def spread(q):
        q = q[np.isfinite(q)]
        return float(np.max(q) - np.min(q)) if q.size else math.inf

    def summary(q):
        q = q[np.isfinite(q)]
        if not q.size:
            return {"n_ok": 0}
        return {"n_ok": int(q.size), "min": float(q.min()), "median": float(np.median(q)),
                "max": float(q.max()), "spread": float(q.max() - q.min())}

    passed = win_fraction >= th["min_win_fraction"] and spread(hq) < spread(cq)
    return {
        "benchmark": "synthetic3d",
        "thresholds": th,
        "n_combinations": len(hk_rows),
        "n_train_hf": train.n,
        "n_validate": validate.n,
        "n_lf": lf.n,
        "q2": {"hierarchical": summary(hq), "conventional": summary(cq)},
        "win_fraction": win_fraction,
        "passed": bool(passed),
        "_rows": {"hierarchical": hk_rows, "conventional": cv_rows},
    }

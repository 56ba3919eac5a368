"""Acceptance suite: twelve numbered criteria, each printed as PASS or FAIL.

Run on its own with ``pytest tests/test_acceptance.py -v``.  Criteria 10 and 11
are full sweeps and take several minutes on a single core.
"""

import os
import time

import numpy as np

from hkrig.bench import forrester_run, synthetic_benchmark
from hkrig.cli import main
from hkrig.data import Dataset, forrester_doe, forrester_hf
from hkrig.gp import Estimation, KrigingModel, fit, loo_cv_objective, neg_log_likelihood
from hkrig.hierarchical import fit_hierarchical
from hkrig.kernels import CorrelationSpec, Family, Structure, corr, corr1d
from hkrig.optimize import OptimizerSpec
from hkrig.selection import CombinationGrid, Mode, enumerate_combinations, mae, q2, run_sweep
from hkrig.trend import TrendSpec, eval_basis_matrix

import oracles

FAMILIES = list(Family)
STRUCTURES = list(Structure)


def _pick(rng, items):
    return items[int(rng.integers(len(items)))]


def _random_problem(rng, n_max, d_max=2, noisy=False):
    n = int(rng.integers(3, n_max + 1))
    d = int(rng.integers(1, d_max + 1))
    spec = CorrelationSpec(_pick(rng, FAMILIES), _pick(rng, STRUCTURES), bool(rng.integers(2)))
    X = rng.random((n, d))
    Y = rng.normal(size=n)
    degree = int(rng.integers(0, 2))
    trend = TrendSpec.ordinary() if degree == 0 or n <= d + 2 else TrendSpec.polynomial(1)
    F = eval_basis_matrix(trend, X)
    theta = 10 ** rng.uniform(-1.3, -0.2, spec.n_theta(d))
    noise = rng.uniform(0.0, 0.1, n) if noisy else np.zeros(n)
    return spec, X, Y, F, theta, noise


def test_c01_forrester_gain(criterion):
    t0 = time.perf_counter()
    run = forrester_run(seed=0, family=Family.GAUSSIAN, estimation=Estimation.MLE)
    elapsed = time.perf_counter() - t0
    hk, conv = run["hierarchical"]["rmse"], run["conventional"]["rmse"]
    ok = hk <= conv / 3.0 and elapsed < 10.0
    criterion(1, ok, f"HK RMSE {hk:.4g} vs conventional {conv:.4g} "
                     f"(ratio {hk / conv:.4f} <= 1/3), {elapsed:.1f}s < 10s")
    assert ok


def test_c02_scaling_factor(criterion):
    run = forrester_run(seed=0)
    beta = run["beta"]
    ok = 1.8 <= beta <= 2.2
    criterion(2, ok, f"beta_hat = {beta:.5f} in [1.8, 2.2]")
    assert ok


def test_c03_grid_cardinality(criterion):
    n = len(enumerate_combinations(CombinationGrid()))
    criterion(3, n == 600, f"{n} combinations == 600")
    assert n == 600


def test_c04_interpolation(criterion):
    rng = np.random.default_rng(2024)
    grid = enumerate_combinations()
    worst_mean = worst_var = 0.0
    t0 = time.perf_counter()
    for i in range(50):
        n = int(rng.integers(5, 16))
        d = int(rng.integers(1, 4))
        combo = _pick(rng, grid)
        trend = combo.trend_spec
        while trend.n_basis(d) > n - 1:
            trend = TrendSpec.polynomial(trend.degree - 1) if trend.degree > 1 else TrendSpec.ordinary()
        X = rng.random((n, d)) * rng.uniform(0.5, 20.0, d)
        Y = np.sin(X @ rng.normal(size=d)) + 0.3 * rng.normal(size=n)
        model = fit(Dataset(X, Y), combo.correlation, trend, combo.estimation,
                    OptimizerSpec(combo.optimizer), seed=i)
        p = model.predict(X)
        worst_mean = max(worst_mean, np.max(np.abs(p.mean - Y)) / np.ptp(Y))
        worst_var = max(worst_var, np.max(p.variance) / model.sigma2_original)
    elapsed = time.perf_counter() - t0
    ok = worst_mean <= 1e-6 and worst_var <= 1e-8 and elapsed < 60.0
    criterion(4, ok, f"max |mean - y|/range = {worst_mean:.2e} <= 1e-6, "
                     f"max var/sigma2 = {worst_var:.2e} <= 1e-8, {elapsed:.1f}s < 60s")
    assert ok


def test_c05_likelihood_oracle(criterion):
    rng = np.random.default_rng(55)
    worst = 0.0
    t0 = time.perf_counter()
    for i in range(20):
        spec, X, Y, F, theta, noise = _random_problem(rng, 10, noisy=bool(i % 2))
        got = neg_log_likelihood(theta, X, Y, F, spec, noise)
        want = oracles.mvn_nll(spec.family.value, spec.structure.value, X, Y, F, theta, noise)
        worst = max(worst, abs(got - want) / abs(want))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-8 and elapsed < 10.0
    criterion(5, ok, f"max relative deviation from MVN density {worst:.2e} <= 1e-8, "
                     f"{elapsed:.1f}s < 10s")
    assert ok


def test_c06_loo_oracle(criterion):
    rng = np.random.default_rng(66)
    worst = 0.0
    t0 = time.perf_counter()
    for i in range(10):
        spec, X, Y, F, theta, noise = _random_problem(rng, 8, noisy=bool(i % 2))
        got = loo_cv_objective(theta, X, Y, F, spec, noise)
        want = oracles.literal_loo(spec.family.value, spec.structure.value, X, Y, F, theta, noise)
        worst = max(worst, abs(got - want) / abs(want))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-6 and elapsed < 30.0
    criterion(6, ok, f"max relative deviation from literal refits {worst:.2e} <= 1e-6, "
                     f"{elapsed:.1f}s < 30s")
    assert ok


def test_c07_constant_lower_level(criterion):
    t0 = time.perf_counter()
    hf = forrester_doe().hf
    x = np.linspace(0.0, 1.0, 11)
    ones = fit(Dataset(x[:, None], np.ones(11)))
    hk = fit_hierarchical(ones, hf)
    ok_model = KrigingModel.assemble(hf, hk.top.spec, TrendSpec.ordinary(), hk.top.theta)
    probe = np.linspace(0.0, 1.0, 50)
    a, b = hk.predict(probe), ok_model.predict(probe)
    dm = np.max(np.abs(a.mean - b.mean) / np.maximum(np.abs(b.mean), 1e-300))
    nz = b.variance > 1e-12 * b.variance.max()
    dv = np.max(np.abs(a.variance[nz] - b.variance[nz]) / b.variance[nz])
    dv_abs = np.max(np.abs(a.variance[~nz] - b.variance[~nz])) if (~nz).any() else 0.0
    elapsed = time.perf_counter() - t0
    ok = dm <= 1e-8 and dv <= 1e-8 and dv_abs <= 1e-8 * b.variance.max() and elapsed < 5.0
    criterion(7, ok, f"mean rel diff {dm:.2e}, variance rel diff {dv:.2e} (<= 1e-8), "
                     f"{elapsed:.1f}s < 5s")
    assert ok


def test_c08_metric_examples(criterion):
    y = np.array([1.0, 2.0, 3.0])
    checks = [
        (q2(y, y), 1.0),
        (q2(y, np.full(3, 2.0)), 0.0),
        (q2(y, [1.0, 2.0, 4.0]), 0.5),
        (mae(y, y), 0.0),
        (mae(y, [1.1, 2.0, 2.8]), 0.1),
        (mae(y, [1.0, 4.0, 3.0]), 1.0),
    ]
    worst = max(abs(got - want) for got, want in checks)
    ok = worst <= 1e-12
    criterion(8, ok, f"{len(checks)} metric examples, max error {worst:.1e} <= 1e-12")
    assert ok


def _sweep_files(out):
    names = ("sweep.json", "sweep.csv", "best_q2_model.json", "best_mae_model.json")
    return {n: (out / n).read_bytes() for n in names}


def test_c09_determinism_across_workers(criterion, tmp_path):
    data = tmp_path / "data"
    assert main(["data", "forrester", "--out", str(data)]) == 0
    common = ["sweep", "--lf-data", str(data / "forrester_lf.csv"),
              "--hf-data", str(data / "forrester_hf.csv"),
              "--validate", str(data / "forrester_validate.csv"),
              "--grid", "family=Gaussian,Matern52", "--grid", "trend=Ordinary,Polynomial1",
              "--seed", "7"]
    outs = []
    for w in (1, 8):
        out = tmp_path / f"w{w}"
        assert main(common + ["--workers", str(w), "--out", str(out)]) == 0
        outs.append(_sweep_files(out))
    same = outs[0] == outs[1]
    criterion(9, same, "96-row sweep reports and best models byte-identical for --workers 1 vs 8")
    assert same


def test_c10_full_sweep(criterion):
    pair = forrester_doe()
    x = np.linspace(0.0, 1.0, 101)
    validate = Dataset(x[:, None], forrester_hf(x))
    workers = min(4, os.cpu_count() or 1)
    t0 = time.perf_counter()
    rows = run_sweep(CombinationGrid(), pair.hf, validate, pair.lf, Mode.HIERARCHICAL,
                     base_seed=0, workers=workers, keep_models=False)
    elapsed = time.perf_counter() - t0
    frac = sum(r.ok for r in rows) / len(rows)
    ok = len(rows) == 600 and frac >= 0.95 and elapsed < 600.0
    criterion(10, ok, f"{len(rows)} rows, {frac:.1%} ok >= 95%, {elapsed:.0f}s < 600s "
                      f"on {workers} worker(s)")
    assert ok


def test_c11_synthetic_robustness(criterion):
    t0 = time.perf_counter()
    report = synthetic_benchmark(seed=0, workers=min(4, os.cpu_count() or 1))
    elapsed = time.perf_counter() - t0
    hq, cq = report["q2"]["hierarchical"], report["q2"]["conventional"]
    ok = (report["n_combinations"] == 60 and report["win_fraction"] >= 0.8
          and hq["spread"] < cq["spread"] and elapsed < 900.0)
    criterion(11, ok, f"HK beats conventional Q2 on {report['win_fraction']:.0%} of 60 "
                      f"(>= 80%); Q2 spread HK {hq['spread']:.3f} < conventional "
                      f"{cq['spread']:.3f}; {elapsed:.0f}s < 900s")
    assert ok


def test_c12_kernel_properties(criterion):
    rng = np.random.default_rng(12)
    worst_gap = 0.0
    for _ in range(100):
        d = int(rng.integers(1, 5))
        x, xp = rng.normal(size=d), rng.normal(size=d)
        theta = 10 ** rng.uniform(-1, 1, d)
        sep = corr(CorrelationSpec("Gaussian", "Separable"), x, xp, theta)
        ell = corr(CorrelationSpec("Gaussian", "Ellipsoidal"), x, xp, theta)
        worst_gap = max(worst_gap, abs(sep - ell))
    h = np.linspace(0.0, 4.0, 1000)
    monotone = all(
        np.all(np.diff([corr1d(f, v, t) for v in h]) <= 0.0)
        for f in FAMILIES for t in (0.1, 1.0, 3.0)
    )
    unit = all(corr1d(f, 0.0, t) == 1.0 for f in FAMILIES for t in (0.1, 1.0, 3.0))
    ok = worst_gap <= 1e-12 and monotone and unit
    criterion(12, ok, f"Gaussian separable/ellipsoidal gap {worst_gap:.1e} <= 1e-12; "
                      f"monotone on 1000-point grid: {monotone}; unit at h=0: {unit}")
    assert ok

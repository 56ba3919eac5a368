"""Sweeping kernel and trend choices, then picking a winner.

The full grid has 600 combinations; this demo restricts it to 24 so it runs
in well under a minute.  Each row is scored on a dense validation grid by
Q2 (closer to 1 is better) and normalized max error (closer to 0 is better).
"""

import numpy as np

from hkrig import CombinationGrid, Dataset, forrester_doe, forrester_hf, run_sweep, select_best
from hkrig.selection import Mode

pair = forrester_doe()
x = np.linspace(0.0, 1.0, 101)
validate = Dataset(x[:, None], forrester_hf(x))

grid = CombinationGrid().restrict(
    family=["Gaussian", "Matern52", "Exponential", "Linear"],
    structure=["Separable"],
    trend=["Ordinary", "Polynomial1", "Polynomial2"],
    estimation=["MLE", "CV"],
    optimizer=["LocalGradient"],
    isotropic=[True],
)
print(f"{len(grid)} combinations")

rows = run_sweep(grid, pair.hf, validate, pair.lf, Mode.HIERARCHICAL, base_seed=0)
print(f"{'#':>3s} {'family':12s} {'trend':12s} {'est':4s} {'Q2':>8s} {'MAE':>8s}")
for r in rows:
    c = r.combination
    if r.ok:
        print(f"{r.index:3d} {c.family.value:12s} {c.trend:12s} {c.estimation.value:4s} "
              f"{r.q2:8.4f} {r.mae:8.4f}")
    else:
        print(f"{r.index:3d} {c.family.value:12s} {c.trend:12s} {c.estimation.value:4s} "
              f"failed: {r.reason}")

# The two criteria need not agree.
for crit in ("Q2", "MAE"):
    best = select_best(rows, crit)
    print(f"best by {crit}: #{best.index} {best.combination.family.value} "
          f"{best.combination.trend} {best.combination.estimation.value}")

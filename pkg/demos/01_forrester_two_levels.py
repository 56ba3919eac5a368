"""Two fidelity levels on the Forrester pair.

A cheap function is sampled on 11 points and an expensive one on only 4.
Ordinary Kriging on the 4 expensive points misses the shape entirely, while
a hierarchical model that borrows the cheap model's trend recovers it.
"""

import numpy as np

from hkrig import fit, fit_hierarchical, forrester_doe, forrester_hf

pair = forrester_doe()
print(f"LF design: {pair.lf.n} points   HF design: {pair.hf.n} points")

# Step 1: the low-fidelity surrogate.
lf_model = fit(pair.lf)
print(f"LF correlation length theta = {lf_model.theta[0]:.3f}")

# Step 2: the high-fidelity level uses the LF mean, scaled by a fitted beta.
hk = fit_hierarchical(lf_model, pair.hf)
print(f"fitted scaling beta = {hk.beta_scale:.4f}")

# Step 3: a conventional model on the same 4 HF points, for contrast.
plain = fit(pair.hf)

x = np.linspace(0.0, 1.0, 101)
truth = forrester_hf(x)
for name, model in (("hierarchical", hk), ("conventional", plain)):
    p = model.predict(x)
    rmse = float(np.sqrt(np.mean((p.mean - truth) ** 2)))
    print(f"{name:>13s}: RMSE {rmse:8.4f}   max sd {np.sqrt(p.variance).max():7.3f}")

print("\n  x      truth      HK mean    plain mean")
for xi in (0.1, 0.3, 0.5, 0.7, 0.9):
    print(f"{xi:4.1f} {forrester_hf(xi):10.4f} {hk.predict(xi).mean[0]:10.4f} "
          f"{plain.predict(xi).mean[0]:10.4f}")

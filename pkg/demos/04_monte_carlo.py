#!/usr/bin/env python3
# Simulating X_t = B(S_t) and testing the samples against the formulas.

import math

import numpy as np

from radlevy import SubordinatorModel, catalog
from radlevy.simulation import (
    atom_check,
    empirical_density_check,
    gradient_bound_check,
    jump_count_check,
    laplace_check,
    neg_moment_mc,
    sample_subordinated,
)

cat = catalog()
models = {n: SubordinatorModel(s) for n, s in cat.items()}
n = 100_000

# a handful of Cauchy points in the plane
print(sample_subordinated(models["stable12"], 2, 1.0, 3, seed=42))

# Laplace transform of S_t
for name, m in models.items():
    reps = laplace_check(m, 1.0, n, seed=1)
    print(f"{name:8s} E exp(-u S_1):", " ".join(f"{r.observed:.4f}/{r.predicted:.4f}" for r in reps))

# compound Poisson: P(X_t = 0) = exp(-lambda t), zero exactly when nothing jumped
rep = atom_check(models["cp"], 1.0, n, seed=7)
print(f"\ncp zero fraction {rep.observed:.4f}, predicted {math.exp(-2):.4f}")
for r in jump_count_check(models["cp"], 1, 1.0, [(0.0, 1.0), (1.0, 3.0)], n, seed=7):
    print(f"  {r.statistic:32s} {r.observed:9.5f} vs {r.predicted:9.5f}  pass={r.passed}")

# radial histograms
for name in ("stable12", "ig", "drift"):
    r = empirical_density_check(models[name], 2, 1.0, n, 40, seed=3)
    print(f"{name:8s} k=2 histogram TV {r.observed:.4f} (budget {r.tolerance:.4f})")

# negative moments: finite for stable-1/2, infinite for gamma with t < kappa
print("\n", neg_moment_mc(models["stable12"], 0.5, 1.0, n).details)
g = neg_moment_mc(models["gamma"], 1.0, 0.5, n)
print(" gamma t=0.5 unstable:", g.details["unstable"], "top share", round(g.details["top_share"], 3))

# smoothing bounded functions: |d/dx P_t u| stays below 4 sup|u| sup p_t
for r in gradient_bound_check(models["stable12"], 1.0):
    print(f"{r.statistic:28s} ratio to bound {r.details['ratio_to_bound']:.3f}")

#!/usr/bin/env python3
# Transition densities of subordinated Brownian motion, two ways.
#
# p_t^k is a Gaussian mixture over the subordinator S_t, and also the radial
# Fourier transform of exp(-t f(|xi|^2)).  For the stable-1/2 subordinator
# (f(u) = sqrt(u)) both must give the Cauchy density.

import math
import os
import sys

import numpy as np

from radlevy import SubordinatorModel, catalog, density_fourier, density_mixture, hartman_wintner
from radlevy.cli import write_svg
from radlevy.transition import PreconditionError, closed_form_density

out_dir = sys.argv[1] if len(sys.argv) > 1 else None
cat = catalog()
r = np.linspace(0.0, 6.0, 13)

# %% Cauchy check in k = 1 and k = 3
for k in (1, 3):
    mix = density_mixture(SubordinatorModel(cat["stable12"]), k, 1.0, r)
    fou = density_fourier(cat["stable12"], k, 1.0, r)
    exact = closed_form_density("cauchy", k, 1.0)(r)
    print(f"k={k}: max |mixture-exact| = {np.max(np.abs(mix - exact)):.2e}, "
          f"max |fourier-exact| = {np.max(np.abs(fou - exact)):.2e}")

# %% the inverse-Gaussian model has no closed form; the routes check each other
mix = density_mixture(SubordinatorModel(cat["ig"]), 1, 1.0, r)
fou = density_fourier(cat["ig"], 1, 1.0, r)
print("\n   r     mixture      fourier")
for x, a, b in zip(r, mix, fou):
    print(f"{x:5.2f}  {a:.8f}  {b:.8f}")

# %% gamma: f(u) = log(1+u) grows too slowly, so exp(-t f) is not integrable for small t
print("\nHartman-Wintner verdicts:", {n: hartman_wintner(s).verdict for n, s in cat.items()})
try:
    density_fourier(cat["gamma"], 1, 0.3, 1.0)
except PreconditionError as exc:
    print("fourier route refused:", exc)
# the mixture route still works; the density is unbounded at the origin
g = SubordinatorModel(cat["gamma"])
print("gamma t=0.3 p(r) for r = 1e-1, 1e-2, 1e-3:",
      [f"{v:.3f}" for v in density_mixture(g, 1, 0.3, [1e-1, 1e-2, 1e-3])])

# %% compound Poisson: an atom at 0 plus a density
cp = SubordinatorModel(cat["cp"])
print(f"\ncp atom weight at t=1: {math.exp(-2):.5f}")

if out_dir:
    os.makedirs(out_dir, exist_ok=True)
    grid = np.linspace(0, 6, 121)
    write_svg(os.path.join(out_dir, "ig_density.svg"), grid, density_mixture(SubordinatorModel(cat["ig"]), 1, 1.0, grid),
              "inverse-Gaussian subordination, k=1, t=1")

#!/usr/bin/env python3
# The generator A_k = -F^{-1} psi F on radial bumps, and the intertwining
# A_k u = (1/r) d/dr A_{k-2} v with v' = r u.

import numpy as np

from radlevy import PolynomialBump, apply_generator, catalog, intertwine_check
from radlevy.generator import intertwine_sides, levy_form_generator

cat = catalog()
u = PolynomialBump(radius=3.0, power=4)
r = np.linspace(0.25, 2.5, 10)

# f(u) = u: the generator is the Laplacian
lap = u.laplacian(3, r)
print("drift, k=3: max |A u - Laplacian u| =", np.max(np.abs(apply_generator(cat["drift"], 3, u, r) - lap)))

# f(u) = sqrt(u) in k=1 from the Fourier side and from the Levy density m_1(y) = 1/(pi y^2)
a = apply_generator(cat["stable12"], 1, u, r)
b = levy_form_generator(cat["stable12"], u, r)
print("stable, k=1: spectral vs jump integral:", np.max(np.abs(a - b)))

# intertwining in k=3
lhs, rhs = intertwine_sides(cat["stable12"], 3, u, r)
print("\n   r       A_3 u        (1/r)(A_1 v)'")
for x, p, q in zip(r, lhs, rhs):
    print(f"{x:5.2f}  {p: .8f}  {q: .8f}")
for name in ("drift", "stable12", "ig", "cp"):
    rep = intertwine_check(cat[name], 3, PolynomialBump(3.0, 3), np.linspace(0.2, 2.5, 12))
    print(f"{name:8s} intertwining err {rep.max_error:.1e}")

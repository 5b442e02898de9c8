#!/usr/bin/env python3
# Walking between dimensions.
#
# montee turns a radial profile on R^k into -(1/2pi) u'(r)/r on R^(k+2);
# applied to p_t^k it gives p_t^(k+2).  descente goes back down.

import numpy as np

from radlevy import SubordinatorModel, catalog, descente, montee, transition_density
from radlevy.radial import RadialProfile, radial_mass
from radlevy.transition import closed_form_density, cm_ladder_check, levy_profile, levy_dimwalk_check

stable = SubordinatorModel(catalog()["stable12"])
r = np.geomspace(0.01, 10, 7)

# the Cauchy density in k=1, computed by quadrature, walked up twice
p1 = transition_density(stable, 1, 1.0).profile
p3 = montee(p1)
p5 = montee(p3)
for k, prof in ((3, p3), (5, p5)):
    exact = closed_form_density("cauchy", k, 1.0)(r)
    print(f"k={k}: max relative error {np.max(np.abs(prof(r) / exact - 1)):.1e}")

# mass is carried along
print("mass of montee(p1) on R^3:", round(radial_mass(montee(closed_form_density('cauchy', 1, 1.0))), 10))

# and back down
back = descente(closed_form_density("cauchy", 3, 1.0))
print("descente(p3) vs p1:", np.max(np.abs(back(r) - closed_form_density("cauchy", 1, 1.0)(r))))

# Levy densities obey the same walk
for name in ("stable12", "cp", "ig"):
    m = SubordinatorModel(catalog()[name])
    rep = levy_dimwalk_check(levy_profile(m, 1), levy_profile(m, 3))
    print(f"levy walk {name:8s} passed={rep.passed} err={rep.max_error:.1e}")

# g(r) = p_t^1(2 sqrt r): its n-th derivative is (-4 pi)^n g_t^(1+2n)
rep = cm_ladder_check(stable, 1.0)
print("CM ladder:", rep.passed, f"{rep.max_error:.1e}")

# a Gaussian bump that is not a density walks just as well
bump = RadialProfile(1, lambda s: np.exp(-np.asarray(s) ** 2 / 2))
print("montee of exp(-r^2/2) at r=1:", montee(bump)(1.0), "expected", np.exp(-0.5) / (2 * np.pi))

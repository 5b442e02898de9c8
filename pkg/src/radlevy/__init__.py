"""Radial Levy processes as subordinated Brownian motions: densities, dimension walk, checks."""

__version__ = "0.1.0"

from .bernstein import (  # noqa: E402
    BernsteinSpec,
    ExponentialCP,
    FiniteAtomic,
    GammaJump,
    InverseGaussianJump,
    Null,
    StableJump,
    catalog,
    check_bernstein_signs,
    check_cm,
    eval_f,
    hartman_wintner,
)
from .generator import PolynomialBump, RadialTestFunction, apply_generator, intertwine_check, primitive_profile  # noqa: E402
from .radial import RadialProfile, descente, fourier_radial, inverse_fourier_radial, montee, radial_mass  # noqa: E402
from .reports import SimulationReport, VerificationReport  # noqa: E402
from .subordinator import SubordinatorModel, atom_rate, density, neg_moment, sample  # noqa: E402
from .transition import (  # noqa: E402
    LevyDensity,
    TransitionDensity,
    density_fourier,
    density_mixture,
    dimwalk_check,
    levy_density,
    levy_dimwalk_check,
    transition_density,
    unimodality_check,
    vague_limit_check,
)

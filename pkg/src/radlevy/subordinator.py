"""Laws of the subordinator S_t: densities, the atom at zero, samplers and negative moments.

S_t = drift*t + J_t where J_t is the pure-jump part driven by the catalogue
Levy measure.  Expectations E[g(S_t); S_t > 0] are computed on a
logarithmic grid s = e^z with the trapezoidal rule, whose end corrections
treat the integrand as a power law in s beyond the grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special, stats

from .bernstein import (
    BernsteinSpec,
    ExponentialCP,
    FiniteAtomic,
    GammaJump,
    InverseGaussianJump,
    Null,
    StableJump,
)
from .numerics import DEFAULT_QUAD, NumericFailure, QuadratureConfig, integrate


class UnsupportedDensity(NotImplementedError):
    """The subordinator law has no closed-form density for this family."""


class Divergent(ArithmeticError):
    """An expectation or integral is infinite."""


# log-grid used for every expectation against the law of S_t
LOG_GRID = np.arange(-60.0, 60.0 + 1e-9, 0.1)
_NEGLIGIBLE = -40.0


def log_trapezoid(log_vals, h, z=None):
    """Integral over z of exp(log_vals) with power-law tails beyond both ends.

    Returns ``inf`` when an end of the grid still carries non-negligible mass
    and the integrand is not decaying there.
    """
    log_vals = np.asarray(log_vals, dtype=float)
    finite = np.isfinite(log_vals)
    if not finite.any():
        return 0.0
    top = log_vals[finite].max()
    w = np.exp(np.where(finite, log_vals - top, -np.inf))
    total = h * (w.sum() - 0.5 * (w[0] + w[-1]))
    for edge, inner in ((0, 1), (-1, -2)):
        if not (np.isfinite(log_vals[edge]) and log_vals[edge] - top > _NEGLIGIBLE):
            continue
        slope = (log_vals[edge] - log_vals[inner]) / h  # growth per unit z moving outward
        if slope >= -1e-3:
            return math.inf
        # power-law tail beyond the grid plus the Euler-Maclaurin end term
        total += w[edge] / (-slope) - h * h / 12.0 * slope * w[edge]
    return total * math.exp(top)


@dataclass(frozen=True)
class SubordinatorModel:
    spec: BernsteinSpec

    @property
    def name(self):
        return self.spec.name or self.spec.levy_measure.family

    @property
    def measure(self):
        return self.spec.levy_measure

    @property
    def has_density(self):
        lm = self.measure
        if isinstance(lm, StableJump):
            return lm.index == 0.5
        return isinstance(lm, (GammaJump, InverseGaussianJump, ExponentialCP))

    # -- law of the jump part J_t -------------------------------------------

    def jump_log_density(self, t, s):
        """log density of the absolutely continuous part of J_t at s > 0."""
        lm = self.measure
        s = np.asarray(s, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            if isinstance(lm, StableJump) and lm.index == 0.5:
                c = t * lm.scale
                return np.log(c / (2 * math.sqrt(math.pi))) - 1.5 * np.log(s) - c * c / (4 * s)
            if isinstance(lm, GammaJump):
                a = lm.shape * t
                return a * math.log(lm.rate) + (a - 1) * np.log(s) - lm.rate * s - special.gammaln(a)
            if isinstance(lm, InverseGaussianJump):
                return np.log(t / math.sqrt(2 * math.pi)) - 1.5 * np.log(s) - (t - lm.b * s) ** 2 / (2 * s)
            if isinstance(lm, ExponentialCP):
                mean = lm.intensity * t
                n_max = int(stats.poisson.isf(1e-16, mean)) + 2
                n = np.arange(1, n_max + 1)
                logp = stats.poisson.logpmf(n, mean)
                terms = (logp[:, None] + n[:, None] * math.log(lm.jump_rate)
                         + (n[:, None] - 1) * np.log(s)[None, ...] - lm.jump_rate * s[None, ...]
                         - special.gammaln(n)[:, None])
                return special.logsumexp(terms, axis=0).reshape(s.shape)
        raise UnsupportedDensity(
            f"no closed-form subordinator density for {self.name}; use the Fourier route")

    def jump_atoms(self, t):
        """Discrete part of J_t as a list of (value, probability)."""
        lm = self.measure
        if isinstance(lm, Null):
            return [(0.0, 1.0)]
        if isinstance(lm, ExponentialCP):
            return [(0.0, math.exp(-lm.intensity * t))]
        if isinstance(lm, FiniteAtomic):
            law = {0.0: 1.0}
            for y, w in lm.atoms:
                mean = w * t
                n_max = int(stats.poisson.isf(1e-15, mean)) + 1
                pmf = stats.poisson.pmf(np.arange(n_max + 1), mean)
                new = {}
                for v, p in law.items():
                    for n, q in enumerate(pmf):
                        key = round(v + n * y, 12)
                        new[key] = new.get(key, 0.0) + p * q
                law = {v: p for v, p in new.items() if p > 1e-18}
            return sorted(law.items())
        return []

    # -- expectations --------------------------------------------------------

    def expect(self, t, log_g, include_zero=False):
        """E[g(S_t); S_t > 0] for g given through its logarithm, vectorised over a leading axis.

        ``log_g(s)`` receives an array of shape (n_nodes,) and must return
        (..., n_nodes).  The result has the leading shape of ``log_g``.
        """
        shift = self.spec.drift * t
        parts = []
        for v, p in self.jump_atoms(t):
            s = shift + v
            if s > 0 or include_zero:
                parts.append(p * np.exp(log_g(np.array([s])))[..., 0])
        if self.has_density:
            z = LOG_GRID
            j = np.exp(z)
            logw = self.jump_log_density(t, j) + z
            lg = log_g(shift + j)
            logs = lg + logw
            flat = logs.reshape(-1, logs.shape[-1])
            vals = np.array([log_trapezoid(row, 0.1) for row in flat]).reshape(logs.shape[:-1])
            parts.append(vals)
        elif not isinstance(self.measure, (Null, ExponentialCP, FiniteAtomic)):
            raise UnsupportedDensity(
                f"no closed-form subordinator density for {self.name}; use the Fourier route")
        if not parts:
            return np.zeros(np.shape(log_g(np.array([1.0])))[:-1])
        return sum(parts)


# ---------------------------------------------------------------------------
# operations

def atom_rate(model: SubordinatorModel):
    """c with P(S_t = 0) = exp(-c t): mass of mu when driftless and finite, else infinity."""
    if model.spec.drift > 0:
        return math.inf
    return model.measure.total_mass()


def atom_weight(model: SubordinatorModel, t):
    c = atom_rate(model)
    return 0.0 if math.isinf(c) else math.exp(-c * t)


def density(model: SubordinatorModel, t, s):
    """Density of the absolutely continuous part of S_t."""
    if t <= 0:
        raise ValueError("t must be positive")
    if not model.has_density:
        raise UnsupportedDensity(
            f"no closed-form subordinator density for {model.name}; use the Fourier route")
    s = np.asarray(s, dtype=float)
    j = s - model.spec.drift * t
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(j > 0, np.exp(model.jump_log_density(t, np.where(j > 0, j, 1.0))), 0.0)
    return out[()] if out.ndim == 0 else out


def continuous_mass(model: SubordinatorModel, t):
    """Total mass of the absolutely continuous part of S_t."""
    if not model.has_density:
        return 0.0
    lw = model.jump_log_density(t, np.exp(LOG_GRID)) + LOG_GRID
    return log_trapezoid(lw, 0.1)


def _kanter(rng, index, size):
    u = rng.uniform(0.0, math.pi, size)
    e = rng.standard_exponential(size)
    a = index
    ratio = np.sin(a * u) / np.sin(u) ** (1.0 / a)
    return ratio * (np.sin((1 - a) * u) / e) ** ((1 - a) / a)


def sample(model: SubordinatorModel, t, rng: np.random.Generator, size=None):
    """Exact draws of S_t from the stream ``rng``."""
    if t <= 0:
        raise ValueError("t must be positive")
    lm = model.measure
    shape = () if size is None else size
    if isinstance(lm, Null):
        jump = np.zeros(shape)
    elif isinstance(lm, StableJump):
        c = t * lm.scale
        if lm.index == 0.5:
            z = rng.standard_normal(shape)
            jump = c * c / (2.0 * z * z)
        else:
            jump = c ** (1.0 / lm.index) * _kanter(rng, lm.index, shape)
    elif isinstance(lm, GammaJump):
        jump = rng.gamma(lm.shape * t, 1.0 / lm.rate, shape)
    elif isinstance(lm, InverseGaussianJump):
        if lm.b > 0:
            jump = rng.wald(t / lm.b, t * t, shape)
        else:
            z = rng.standard_normal(shape)
            jump = t * t / (z * z)
    elif isinstance(lm, ExponentialCP):
        n = rng.poisson(lm.intensity * t, shape)
        jump = rng.gamma(n, 1.0 / lm.jump_rate)
    elif isinstance(lm, FiniteAtomic):
        jump = np.zeros(shape)
        for y, w in lm.atoms:
            jump = jump + y * rng.poisson(w * t, shape)
    else:  # pragma: no cover
        raise TypeError(lm)
    out = model.spec.drift * t + jump
    return float(out) if size is None else np.asarray(out, dtype=float)


# ---------------------------------------------------------------------------
# negative moments

@dataclass(frozen=True)
class NegMoment:
    value: float
    route_a: float
    route_b: float | None
    agreement: float | None

    @property
    def finite(self):
        return math.isfinite(self.value)


def neg_moment_laplace(model: SubordinatorModel, kappa, t, cfg: QuadratureConfig = DEFAULT_QUAD,
                       max_panels=40):
    """Gamma(kappa)^{-1} int_0^inf exp(-t f(r)) r^{kappa-1} dr on dyadic panels.

    Returns ``inf`` when the dyadic panel sums stop shrinking.
    """
    spec = model.spec

    def weight(r):
        return math.exp(-t * float(spec.closed_form(r)))

    from scipy.integrate import quad
    head = quad(weight, 0.0, 1.0, weight="alg", wvar=(kappa - 1.0, 0.0),
                epsabs=1e-300, epsrel=cfg.rel_tol, limit=cfg.max_subdivisions)[0]
    total = head
    panels = []
    for j in range(max_panels):
        lo, hi = 2.0 ** j, 2.0 ** (j + 1)
        p = integrate(lambda r: weight(r) * r ** (kappa - 1.0), lo, hi,
                      QuadratureConfig(cfg.rel_tol, 1e-300, cfg.max_subdivisions))[0]
        panels.append(p)
        total += p
        if p <= 1e-15 * total:
            return total / math.gamma(kappa)
    tail = np.array(panels[-10:])
    if np.any(tail <= 0):
        return total / math.gamma(kappa)
    ratios = tail[1:] / tail[:-1]
    rho = ratios[-1]
    if rho >= 1.0 - 1e-3 or np.any(np.diff(ratios[-4:]) > 1e-3):
        return math.inf
    return (total + panels[-1] * rho / (1.0 - rho)) / math.gamma(kappa)


def neg_moment_density(model: SubordinatorModel, kappa, t):
    """E[S_t^{-kappa}; S_t > 0] against the law of S_t (density plus atoms)."""
    return float(model.expect(t, lambda s: -kappa * np.log(s)))


def neg_moment(model: SubordinatorModel, kappa, t, cfg: QuadratureConfig = DEFAULT_QUAD, rel_tol=1e-6):
    """E S_t^{-kappa} by the Laplace-exponent route, cross-checked against the density route.

    An atom at zero makes the moment infinite.  Raises :class:`NumericFailure`
    when the two routes disagree by more than ``rel_tol``.
    """
    if kappa <= 0 or t <= 0:
        raise ValueError("kappa and t must be positive")
    if math.isfinite(atom_rate(model)):
        return NegMoment(math.inf, math.inf, None, None)
    a = neg_moment_laplace(model, kappa, t, cfg)
    b = None
    agreement = None
    if model.has_density or isinstance(model.measure, Null):
        b = neg_moment_density(model, kappa, t)
        if math.isfinite(a) != math.isfinite(b):
            raise NumericFailure(f"neg_moment routes disagree on finiteness: {a} vs {b}")
        if math.isfinite(a):
            agreement = abs(a - b) / abs(a)
            if agreement > rel_tol:
                raise NumericFailure("neg_moment routes disagree", agreement)
    return NegMoment(a, a, b, agreement)

"""Bernstein functions f(u) = drift*u + int (1 - e^{-uy}) mu(dy) and sign-pattern checks.

A :class:`BernsteinSpec` is a drift plus one member of a closed catalogue of
Levy measures.  Every family has a closed form for f, so the quadrature path
in :func:`eval_f_quadrature` doubles as an oracle for the closed forms.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np
from .numerics import (
    DEFAULT_QUAD,
    EPS,
    ConfigurationError,
    QuadratureConfig,
    fd_noise_floor,
    finite_diff,
    fd_weights,
    default_half_width,
    integrate,
)
from .reports import VerificationReport


# ---------------------------------------------------------------------------
# Levy measures of the subordinator

@dataclass(frozen=True)
class StableJump:
    """mu(dy) = index*scale/Gamma(1-index) * y^{-1-index} dy, so f(u) = scale*u^index."""

    index: float
    scale: float = 1.0
    family = "stable"

    def __post_init__(self):
        if not 0 < self.index < 1:
            raise ValueError("stable index must lie in (0, 1)")
        if self.scale <= 0:
            raise ValueError("stable scale must be positive")

    @property
    def norm(self):
        return self.index * self.scale / math.gamma(1.0 - self.index)

    def density(self, y):
        return self.norm * np.asarray(y, dtype=float) ** (-1.0 - self.index)

    def log_density(self, y):
        return math.log(self.norm) - (1.0 + self.index) * np.log(y)

    def laplace_exponent(self, u):
        return self.scale * np.asarray(u, dtype=float) ** self.index

    def total_mass(self):
        return math.inf

    def params(self):
        return {"index": self.index, "scale": self.scale}


@dataclass(frozen=True)
class GammaJump:
    """mu(dy) = shape * y^{-1} e^{-rate*y} dy, so f(u) = shape*log(1 + u/rate)."""

    shape: float = 1.0
    rate: float = 1.0
    family = "gamma"

    def __post_init__(self):
        if self.shape <= 0 or self.rate <= 0:
            raise ValueError("gamma shape and rate must be positive")

    def density(self, y):
        y = np.asarray(y, dtype=float)
        return self.shape * np.exp(-self.rate * y) / y

    def log_density(self, y):
        return math.log(self.shape) - self.rate * y - np.log(y)

    def laplace_exponent(self, u):
        return self.shape * np.log1p(np.asarray(u, dtype=float) / self.rate)

    def total_mass(self):
        return math.inf

    def params(self):
        return {"shape": self.shape, "rate": self.rate}


@dataclass(frozen=True)
class InverseGaussianJump:
    """First-passage subordinator of a Brownian motion with drift ``b``.

    mu(dy) = (2 pi)^{-1/2} y^{-3/2} e^{-b^2 y/2} dy and f(u) = sqrt(2u + b^2) - b.
    """

    b: float = 1.0
    family = "inverse_gaussian"

    def __post_init__(self):
        if self.b < 0:
            raise ValueError("inverse Gaussian drift b must be nonnegative")

    def density(self, y):
        y = np.asarray(y, dtype=float)
        return y ** -1.5 * np.exp(-0.5 * self.b ** 2 * y) / math.sqrt(2 * math.pi)

    def log_density(self, y):
        return -0.5 * math.log(2 * math.pi) - 1.5 * np.log(y) - 0.5 * self.b ** 2 * y

    def laplace_exponent(self, u):
        u = np.asarray(u, dtype=float)
        # sqrt(2u + b^2) - b without cancellation for small u
        return 2 * u / (np.sqrt(2 * u + self.b ** 2) + self.b) if self.b > 0 else np.sqrt(2 * u)

    def total_mass(self):
        return math.inf

    def params(self):
        return {"b": self.b}


@dataclass(frozen=True)
class ExponentialCP:
    """Compound Poisson jumps: intensity ``intensity``, Exp(``jump_rate``) sizes.

    mu(dy) = intensity*jump_rate*e^{-jump_rate*y} dy, f(u) = intensity*u/(u + jump_rate).
    """

    intensity: float = 2.0
    jump_rate: float = 1.0
    family = "exponential_cp"

    def __post_init__(self):
        if self.intensity <= 0 or self.jump_rate <= 0:
            raise ValueError("intensity and jump rate must be positive")

    def density(self, y):
        y = np.asarray(y, dtype=float)
        return self.intensity * self.jump_rate * np.exp(-self.jump_rate * y)

    def log_density(self, y):
        return math.log(self.intensity * self.jump_rate) - self.jump_rate * y

    def laplace_exponent(self, u):
        u = np.asarray(u, dtype=float)
        return self.intensity * u / (u + self.jump_rate)

    def total_mass(self):
        return self.intensity

    def params(self):
        return {"intensity": self.intensity, "jump_rate": self.jump_rate}


@dataclass(frozen=True)
class FiniteAtomic:
    """mu = sum_i w_i delta_{y_i}."""

    atoms: tuple = ()
    family = "finite_atomic"

    def __post_init__(self):
        atoms = tuple((float(y), float(w)) for y, w in self.atoms)
        if not atoms:
            raise ValueError("FiniteAtomic needs at least one atom; use Null for no jumps")
        if any(y <= 0 or w <= 0 for y, w in atoms):
            raise ValueError("atom locations and weights must be positive")
        object.__setattr__(self, "atoms", atoms)

    density = None
    log_density = None

    def laplace_exponent(self, u):
        u = np.asarray(u, dtype=float)
        return sum(-w * np.expm1(-u * y) for y, w in self.atoms)

    def total_mass(self):
        return sum(w for _, w in self.atoms)

    def params(self):
        return {"atoms": [list(a) for a in self.atoms]}


@dataclass(frozen=True)
class Null:
    family = "null"
    density = None
    log_density = None

    def laplace_exponent(self, u):
        return np.zeros_like(np.asarray(u, dtype=float))

    def total_mass(self):
        return 0.0

    def params(self):
        return {}


LevyMeasure = Union[StableJump, GammaJump, InverseGaussianJump, ExponentialCP, FiniteAtomic, Null]

FAMILIES = {cls.family: cls for cls in (StableJump, GammaJump, InverseGaussianJump, ExponentialCP, FiniteAtomic, Null)}


@dataclass(frozen=True)
class BernsteinSpec:
    drift: float = 0.0
    levy_measure: LevyMeasure = field(default_factory=Null)
    name: str = ""

    def __post_init__(self):
        if not self.drift >= 0:
            raise ValueError("drift must be nonnegative")
        if not isinstance(self.levy_measure, tuple(FAMILIES.values())):
            raise TypeError(f"unsupported Levy measure {self.levy_measure!r}")

    @property
    def closed_form(self):
        """Closed-form evaluator of f; valid on [0, inf) for every catalogue family."""
        lm = self.levy_measure
        return lambda u: self.drift * np.asarray(u, dtype=float) + lm.laplace_exponent(u)

    def __call__(self, u):
        return eval_f(self, u)

    @property
    def is_compound_poisson(self):
        return self.drift == 0 and math.isfinite(self.levy_measure.total_mass()) \
            and not isinstance(self.levy_measure, Null)

    def to_dict(self):
        lm = self.levy_measure
        out = {"drift": self.drift, "levy_measure": {"family": lm.family, **lm.params()}}
        if self.name:
            out["name"] = self.name
        return out

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data):
        lm_data = dict(data.get("levy_measure") or {"family": "null"})
        family = lm_data.pop("family")
        if family not in FAMILIES:
            raise ValueError(f"unknown Levy measure family {family!r}")
        if family == "finite_atomic":
            lm = FiniteAtomic(tuple(tuple(a) for a in lm_data["atoms"]))
        else:
            lm = FAMILIES[family](**lm_data)
        return cls(drift=float(data.get("drift", 0.0)), levy_measure=lm, name=data.get("name", ""))

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def catalog():
    """Named reference specs used by the verification suites and the CLI."""
    return {
        "drift": BernsteinSpec(1.0, Null(), name="drift"),
        "stable12": BernsteinSpec(0.0, StableJump(0.5, 1.0), name="stable12"),
        "ig": BernsteinSpec(0.0, InverseGaussianJump(1.0), name="ig"),
        "gamma": BernsteinSpec(0.0, GammaJump(1.0, 1.0), name="gamma"),
        "cp": BernsteinSpec(0.0, ExponentialCP(2.0, 1.0), name="cp"),
    }


# ---------------------------------------------------------------------------
# evaluation

def eval_f_quadrature(spec: BernsteinSpec, u, cfg: QuadratureConfig = DEFAULT_QUAD):
    """f(u) from the Levy-Khintchine integral, ignoring any closed form."""
    if u < 0:
        raise ValueError("f is only defined for u >= 0")
    lm = spec.levy_measure
    jump = 0.0
    if isinstance(lm, FiniteAtomic):
        jump = sum(-w * math.expm1(-u * y) for y, w in lm.atoms)
    elif not isinstance(lm, Null) and u > 0:
        # y = e^z turns power-law ends into exponential ones
        def integrand(z):
            if z > 700.0 or z < -700.0:
                return 0.0
            y = math.exp(z)
            return -math.expm1(-u * y) * math.exp(float(lm.log_density(y)) + z)
        z0 = -math.log(u)
        knots = [z0 + d for d in (-40.0, -20.0, -10.0, -5.0, 0.0, 5.0, 10.0, 20.0, 40.0)]
        qcfg = QuadratureConfig(cfg.rel_tol, 1e-300, max(cfg.max_subdivisions, 400))
        jump = integrate(integrand, -math.inf, knots[0], qcfg)[0]
        for lo, hi in zip(knots[:-1], knots[1:]):
            jump += integrate(integrand, lo, hi, qcfg)[0]
        jump += integrate(integrand, knots[-1], math.inf, qcfg)[0]
    return spec.drift * u + jump


def eval_f(spec: BernsteinSpec, u, cfg: QuadratureConfig = DEFAULT_QUAD, quadrature=False):
    """f(u) for scalar or array ``u``; closed form unless ``quadrature`` is set."""
    u_arr = np.asarray(u, dtype=float)
    if np.any(u_arr < 0):
        raise ValueError("f is only defined for u >= 0")
    if quadrature:
        vals = np.array([eval_f_quadrature(spec, float(v), cfg) for v in u_arr.ravel()]).reshape(u_arr.shape)
        return vals[()] if vals.ndim == 0 else vals
    return spec.closed_form(u)


# ---------------------------------------------------------------------------
# sign-pattern checks

MAX_ORDER = 8


def _as_function(target):
    if isinstance(target, BernsteinSpec):
        return lambda u: float(target.closed_form(u)), target.name or target.levy_measure.family
    return target, getattr(target, "__name__", "function")


def _steps(grid, order):
    """Per-point steps: a fixed fraction of x, never wider than the local grid gap."""
    grid = np.asarray(grid, dtype=float)
    m = max(default_half_width(order), 1)
    eta = 2.0 * EPS ** (1.0 / (order + 2))
    gaps = np.diff(grid)
    local_gap = np.minimum(np.concatenate((gaps, [np.inf])), np.concatenate(([np.inf], gaps)))
    h = np.minimum(eta * grid, local_gap / m)
    h = np.minimum(h, 0.9 * grid / m)
    return h


def _sign_check(fn, grid, n_range, sign_of, identity, label):
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or len(grid) < 2:
        raise ConfigurationError("grid too coarse: need at least two abscissae")
    if np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
        raise ConfigurationError("grid must be strictly positive and increasing")
    worst = math.inf
    failures = []
    details = {}
    for n in n_range:
        h = _steps(grid, n)
        m = max(default_half_width(n), 1)
        offsets, weights = fd_weights(n, default_half_width(n)) if n > 0 else ((0,), (1.0,))
        margins = []
        for x, hx in zip(grid, h):
            est = finite_diff(fn, x, n, hx, lower=0.0) if n > 0 else fn(x)
            scale = sum(abs(w) for w in weights) * max(abs(fn(x + o * hx)) for o in range(-m, m + 1))
            floor = fd_noise_floor(n, hx, scale) if n > 0 else 0.0
            signed = sign_of(n) * est
            margins.append(signed + floor)
            if signed < -floor:
                failures.append({"order": n, "x": float(x), "estimate": float(est), "floor": float(floor)})
        details[f"order_{n}_min_margin"] = float(min(margins))
        worst = min(worst, min(margins))
    return VerificationReport(
        identity=identity,
        passed=not failures,
        max_error=float(max(0.0, -worst)),
        tolerance=0.0,
        grid={"min": float(grid[0]), "max": float(grid[-1]), "n": int(len(grid))},
        details={"target": label, "first_failure": failures[0] if failures else None,
                 "n_failures": len(failures), **details},
    )


def check_bernstein_signs(target, grid, n_max=5):
    """(-1)^{n-1} f^{(n)} >= -eps_fd on ``grid`` for n = 1..n_max.

    ``target`` is a :class:`BernsteinSpec` or any scalar callable (used for
    negative fixtures such as u**2).
    """
    if not 1 <= n_max <= MAX_ORDER:
        raise ConfigurationError(f"n_max must lie in 1..{MAX_ORDER}")
    fn, label = _as_function(target)
    return _sign_check(fn, grid, range(1, n_max + 1), lambda n: (-1) ** (n - 1),
                       "bernstein-sign-pattern", label)


def check_cm(g: Callable, grid, n_max=5):
    """(-1)^n g^{(n)} >= -eps_fd on ``grid`` for n = 0..n_max."""
    if not 0 <= n_max <= MAX_ORDER:
        raise ConfigurationError(f"n_max must lie in 0..{MAX_ORDER}")
    fn, label = _as_function(g)
    return _sign_check(fn, grid, range(0, n_max + 1), lambda n: (-1) ** n,
                       "complete-monotonicity", label)


def cm_of_exponent(spec: BernsteinSpec, t):
    """r -> exp(-t f(r)), completely monotone whenever f is Bernstein."""
    def g(r):
        return math.exp(-t * float(spec.closed_form(r)))
    g.__name__ = f"exp(-{t}*f)"
    return g


# ---------------------------------------------------------------------------
# Hartman-Wintner

@dataclass(frozen=True)
class HWVerdict:
    verdict: str
    radii: tuple
    ratios: tuple

    @property
    def holds(self):
        return self.verdict == "holds"


def default_hw_probe():
    return np.logspace(1, 12, 23)


def hartman_wintner(target, r_probe=None, growth_bound=10.0, rel_band=0.01, window=4):
    """Numerical verdict on f(r)/log r -> infinity.

    ``holds``: the ratio increases over the last ``window`` probe points and
    exceeds ``growth_bound`` at the top of the grid.  ``fails``: the ratio has
    stabilised, successive values moving by at most ``rel_band`` of max(ratio, 1).
    Anything else is ``inconclusive``.
    """
    r_probe = default_hw_probe() if r_probe is None else np.asarray(r_probe, dtype=float)
    if np.any(r_probe <= 1):
        raise ConfigurationError("probe radii must exceed 1")
    if math.log10(r_probe[-1] / r_probe[0]) < 6:
        raise ConfigurationError("probe grid must span at least six decades")
    fn, _ = _as_function(target)
    ratios = np.array([float(fn(r)) / math.log(r) for r in r_probe])
    tail = ratios[-window:]
    steps = np.diff(tail)
    if np.all(steps > 0) and tail[-1] >= growth_bound:
        verdict = "holds"
    elif np.all(np.abs(steps) <= rel_band * np.maximum(np.abs(tail[1:]), 1.0)):
        verdict = "fails"
    else:
        verdict = "inconclusive"
    return HWVerdict(verdict, tuple(float(r) for r in r_probe), tuple(float(q) for q in ratios))

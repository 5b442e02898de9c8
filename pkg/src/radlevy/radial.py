"""Radial functions on R^k, their Fourier transforms, and the dimension walk.

Fourier normalisation: F u(xi) = (2 pi)^{-k} int e^{-i x.xi} u(x) dx, so the
inverse carries no constant and, for radial u, F^{-1} u = (2 pi)^k F u.
For u(x) = U(|x|) the transform is the Hankel integral

    F_k u(r) = (2 pi)^{-k/2} r^{1-k/2} int_0^inf U(s) s^{k/2} J_{k/2-1}(s r) ds.

montee maps a radial profile in dimension k to -(1/(2 pi)) U'(r)/r in
dimension k+2; descente is its inverse, r -> 2 pi int_r^inf s U(s) ds.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
from scipy import special
from scipy.interpolate import CubicSpline

from .numerics import (
    bessel_zeros,
    DEFAULT_QUAD,
    DomainError,
    QuadratureConfig,
    fd_weights,
    integrate,
    integrate_bessel,
    sphere_area,
)


def default_grid(n=512, r_min=1e-3, r_max=12.0):
    """Geometric grid on [r_min, r_max]; the origin is handled by limits."""
    return np.geomspace(r_min, r_max, n)


def _vectorise(fn):
    def call(r):
        r = np.asarray(r, dtype=float)
        try:
            out = np.asarray(fn(r), dtype=float)
            if out.shape == r.shape:
                return out
        except (TypeError, ValueError):
            pass
        return np.vectorize(lambda x: float(fn(float(x))), otypes=[float])(r)
    return call


@dataclass(frozen=True)
class RadialProfile:
    """U(r) for a radial function u(x) = U(|x|) on R^dim."""

    dim: int
    fn: Callable
    grid: Optional[np.ndarray] = None
    support_hint: Optional[float] = None
    derivative: Optional[Callable] = None
    label: str = ""
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise DomainError("dimension must be a positive integer")
        if self.grid is not None:
            g = np.asarray(self.grid, dtype=float)
            if np.any(g < 0) or np.any(np.diff(g) <= 0):
                raise DomainError("grid must be nonnegative and strictly increasing")
            object.__setattr__(self, "grid", g)

    def evaluate(self, r):
        r_arr = np.asarray(r, dtype=float)
        if np.any(r_arr < 0):
            raise DomainError("radial profiles are defined for r >= 0")
        out = _vectorise(self.fn)(r_arr)
        if self.support_hint is not None:
            out = np.where(r_arr >= self.support_hint, 0.0, out)
        return float(out) if out.ndim == 0 else out

    __call__ = evaluate

    @property
    def abscissae(self):
        return default_grid() if self.grid is None else self.grid

    @property
    def values(self):
        if "values" not in self._cache:
            self._cache["values"] = np.asarray(self.evaluate(self.abscissae), dtype=float)
        return self._cache["values"]

    def with_grid(self, grid):
        return replace(self, grid=np.asarray(grid, dtype=float), _cache={})

    def to_csv(self, path=None, grid=None):
        """Write columns r,value; returns the CSV text when ``path`` is None."""
        g = self.abscissae if grid is None else np.asarray(grid, dtype=float)
        vals = self.evaluate(g) if grid is not None else self.values
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["r", "value"])
        for x, v in zip(np.atleast_1d(g), np.atleast_1d(vals)):
            w.writerow([repr(float(x)), repr(float(v))])
        text = buf.getvalue()
        if path is None:
            return text
        with open(path, "w", newline="") as fh:
            fh.write(text)
        return path


def tabulated(u: RadialProfile, grid, tail_zero=True):
    """Cubic-spline surrogate of ``u`` built from one pass over ``grid``.

    The spline is clamped to zero slope at r = 0 (radial profiles are even)
    and the profile is taken as zero beyond the last abscissa when
    ``tail_zero`` is set.
    """
    g = np.asarray(grid, dtype=float)
    if g[0] != 0.0:
        raise DomainError("tabulation grid must start at r = 0")
    vals = np.asarray(u.evaluate(g), dtype=float)
    spline = CubicSpline(g, vals, bc_type=((1, 0.0), "natural"))
    return RadialProfile(u.dim, spline, grid=g, support_hint=g[-1] if tail_zero else None,
                         derivative=spline.derivative(), label=f"tab[{u.label}]")


def zero_profile(dim):
    return RadialProfile(dim, lambda r: np.zeros_like(np.asarray(r, dtype=float)), label="0")


# ---------------------------------------------------------------------------
# radial integration

def radial_mass(u: RadialProfile, a=0.0, b=math.inf, cfg: QuadratureConfig = DEFAULT_QUAD):
    """int_{a<|x|<b} u dx = |S^{k-1}| int_a^b r^{k-1} U(r) dr."""
    k = u.dim
    if u.support_hint is not None:
        b = min(b, u.support_hint)
    if b <= a:
        return 0.0
    pts = None
    if math.isinf(b):
        pts = [p for p in (0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 64.0) if p > a]
    val, _ = integrate(lambda r: r ** (k - 1) * u.evaluate(r), a, b, cfg, points=pts)
    return sphere_area(k) * val


# ---------------------------------------------------------------------------
# Fourier transform of radial functions

def _hankel_integral(u: RadialProfile, r, cfg):
    k = u.dim
    nu = k / 2 - 1

    def fn(s):
        return u.evaluate(s) * s ** (k / 2)

    if u.support_hint is None:
        return integrate_bessel(fn, nu, r, cfg)
    # compact support: integrate zero to zero up to the support radius
    R = u.support_hint
    n_z = max(int(R * r / math.pi) + 2, 2)
    zs = bessel_zeros(nu, n_z) / r
    edges = np.concatenate(([0.0], zs[zs < R], [R]))
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        total += integrate(lambda s: fn(s) * special.jv(nu, s * r), lo, hi, cfg)[0]
    return total


def fourier_radial(u: RadialProfile, r, cfg: QuadratureConfig = DEFAULT_QUAD):
    """F_k u(r) with the (2 pi)^{-k} forward normalisation; vectorised over r."""
    k = u.dim
    r_arr = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(r_arr < 0):
        raise DomainError("r must be nonnegative")
    out = np.empty_like(r_arr)
    for i, x in enumerate(r_arr):
        if x == 0.0:
            out[i] = (2 * math.pi) ** (-k) * radial_mass(u, cfg=cfg)
        else:
            out[i] = (2 * math.pi) ** (-k / 2) * x ** (1 - k / 2) * _hankel_integral(u, x, cfg)
    return float(out[0]) if np.ndim(r) == 0 else out


def inverse_fourier_radial(u: RadialProfile, r, cfg: QuadratureConfig = DEFAULT_QUAD):
    """F_k^{-1} u(r) = (2 pi)^k F_k u(r) for radial u."""
    return (2 * math.pi) ** u.dim * fourier_radial(u, r, cfg)


def fourier_profile(u: RadialProfile, cfg: QuadratureConfig = DEFAULT_QUAD, inverse=False):
    """F_k u (or F_k^{-1} u) as a profile in the same dimension."""
    op = inverse_fourier_radial if inverse else fourier_radial
    return RadialProfile(u.dim, lambda r: op(u, r, cfg), grid=u.grid,
                         label=f"{'Finv' if inverse else 'F'}[{u.label}]")


# ---------------------------------------------------------------------------
# dimension walk

MONTEE_ORIGIN = 1e-6


def _second_derivative_at_origin(fn, delta):
    # even profile U = a + b r^2 + c r^4 + ...; fit through r = 0, delta, 2 delta
    u0, u1, u2 = (float(fn(np.array(x))) for x in (0.0, delta, 2 * delta))
    b = (16.0 * (u1 - u0) - (u2 - u0)) / (12.0 * delta ** 2)
    return 2.0 * b


def montee(u: RadialProfile, step=2e-3, origin_delta=1e-2):
    """r -> -(1/(2 pi)) U'(r)/r as a profile in dimension k+2.

    U' comes from ``u.derivative`` when available, otherwise from a five-point
    central difference with step ``step * max(r, 0.05)``, capped so the
    stencil stays in (0, inf).  Near the origin the removable singularity is
    resolved by the parabolic limit U'(r)/r -> U''(0).
    """
    base = _vectorise(u.fn)
    deriv = None if u.derivative is None else _vectorise(u.derivative)
    offsets, weights = fd_weights(1, 2)

    def fn(r):
        r = np.asarray(r, dtype=float)
        flat = np.atleast_1d(r).astype(float)
        out = np.empty_like(flat)
        near = flat < MONTEE_ORIGIN
        if near.any():
            if deriv is not None:
                h = MONTEE_ORIGIN
                lim = float(deriv(np.array(h))) / h
            else:
                lim = _second_derivative_at_origin(base, origin_delta)
            out[near] = lim
        far = ~near
        if far.any():
            x = flat[far]
            if deriv is not None:
                d = deriv(x)
            else:
                h = np.minimum(step * np.maximum(x, 0.05), x / 3.0)
                d = sum(w * base(x + o * h) for o, w in zip(offsets, weights) if w != 0.0) / h
            out[far] = d / x
        out = -out / (2 * math.pi)
        return out.reshape(r.shape) if r.ndim else float(out[0])

    return RadialProfile(u.dim + 2, fn, grid=u.grid, support_hint=u.support_hint,
                         label=f"montee[{u.label}]")


def tail_integrable(u: RadialProfile, probe=(1e4, 1e5, 1e6)):
    """Whether s U(s) is integrable at infinity, judged from its log-slope on ``probe``."""
    if u.support_hint is not None:
        return True
    s = np.asarray(probe, dtype=float)
    v = np.abs(np.asarray(u.evaluate(s), dtype=float)) * s
    if np.all(v == 0):
        return True
    if np.any(v == 0):
        return True
    slopes = np.diff(np.log(v)) / np.diff(np.log(s))
    return bool(np.all(slopes < -1.0 - 1e-3))


def descente(u: RadialProfile, cfg: QuadratureConfig = DEFAULT_QUAD):
    """r -> 2 pi int_r^inf s U(s) ds as a profile in dimension k-2."""
    if u.dim < 3:
        raise DomainError("descente needs dimension k >= 3")
    if not tail_integrable(u):
        raise DomainError("descente: s*U(s) is not integrable at infinity")
    base = _vectorise(u.fn)
    R = u.support_hint

    def scalar(x):
        b = math.inf if R is None else R
        if x >= b:
            return 0.0
        pts = None
        if math.isinf(b):
            pts = [max(x, 1.0) * 2.0 ** j for j in range(1, 12)]
        val, _ = integrate(lambda s: s * float(base(np.array(s))), x, b, cfg, points=pts)
        return 2 * math.pi * val

    def fn(r):
        r = np.asarray(r, dtype=float)
        out = np.array([scalar(x) for x in np.atleast_1d(r)])
        return out.reshape(r.shape) if r.ndim else float(out[0])

    return RadialProfile(u.dim - 2, fn, grid=u.grid, support_hint=R,
                         derivative=lambda r: -2 * math.pi * np.asarray(r) * base(r),
                         label=f"descente[{u.label}]")

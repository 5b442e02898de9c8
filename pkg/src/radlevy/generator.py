"""The generator A_k u = -F^{-1}(psi F u) on radial test functions, and the intertwining check.

Polynomial bumps u(r) = amp (1 - (r/R)^2)^m have the closed-form transform

    F_k u(rho) = amp (2 pi)^{-k/2} rho^{1-k/2} R^{k/2+1} 2^m m! J_{k/2+m}(R rho) / (R rho)^{m+1},

so A_k u reduces to one integral of psi against a product of two Bessel
functions:

    A_k u(r) = -amp r^{1-k/2} R^{k/2-m} 2^m m! int_0^inf psi(rho) rho^{-m} J_{k/2+m}(R rho) J_{k/2-1}(r rho) drho.

Other test functions go through a slower spectral route that evaluates
both Hankel integrals with composite Gauss-Legendre rules.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import special

from .bernstein import BernsteinSpec, Null
from .numerics import DEFAULT_QUAD, DomainError, NumericFailure, QuadratureConfig, fd_weights, integrate
from .numerics import integrate_bessel_product
from .radial import RadialProfile
from .reports import VerificationReport
from .transition import kernel_scale, levy_density, symbol


@dataclass(frozen=True)
class RadialTestFunction:
    """Compactly supported radial test function U on [0, support_radius)."""

    fn: Callable
    support_radius: float
    derivative: Callable
    second_derivative: Optional[Callable] = None
    label: str = "u"

    def __post_init__(self):
        if not self.support_radius > 0:
            raise DomainError("support radius must be positive")

    def evaluate(self, r):
        r = np.asarray(r, dtype=float)
        out = np.where(r < self.support_radius, self.fn(np.minimum(r, self.support_radius)), 0.0)
        return float(out) if out.ndim == 0 else out

    __call__ = evaluate

    def d1(self, r):
        r = np.asarray(r, dtype=float)
        out = np.where(r < self.support_radius, self.derivative(np.minimum(r, self.support_radius)), 0.0)
        return float(out) if out.ndim == 0 else out

    def d2(self, r):
        if self.second_derivative is not None:
            r = np.asarray(r, dtype=float)
            out = np.where(r < self.support_radius, self.second_derivative(np.minimum(r, self.support_radius)), 0.0)
            return float(out) if out.ndim == 0 else out
        h = 1e-4 * max(self.support_radius, 1.0)
        return (self.d1(np.asarray(r) + h) - self.d1(np.asarray(r) - h)) / (2 * h)

    def profile(self, dim):
        return RadialProfile(dim, self.evaluate, support_hint=self.support_radius,
                             derivative=self.d1, label=self.label)

    def support_check(self, n=200):
        """U vanishes on a grid beyond the support radius."""
        g = np.linspace(self.support_radius, 3 * self.support_radius, n)
        return bool(np.all(np.asarray(self.evaluate(g)) == 0.0))


class PolynomialBump(RadialTestFunction):
    """amp * (1 - (r/R)^2)^m on [0, R), which is C^{m-1}."""

    def __init__(self, radius=3.0, power=4, amplitude=1.0):
        if int(power) != power or power < 1:
            raise DomainError("bump power must be a positive integer")
        R, m, a = float(radius), int(power), float(amplitude)

        def fn(r):
            return a * (1.0 - (np.asarray(r) / R) ** 2) ** m

        def d1(r):
            r = np.asarray(r)
            return -2.0 * a * m * r / R ** 2 * (1.0 - (r / R) ** 2) ** (m - 1)

        def d2(r):
            r = np.asarray(r)
            q = 1.0 - (r / R) ** 2
            second = 4.0 * a * m * (m - 1) * r ** 2 / R ** 4 * q ** (m - 2) if m >= 2 else 0.0 * r
            return -2.0 * a * m / R ** 2 * q ** (m - 1) + second

        super().__init__(fn, R, d1, d2, f"bump(R={R:g},m={m},amp={a:g})")
        object.__setattr__(self, "power", m)
        object.__setattr__(self, "amplitude", a)

    def laplacian(self, k, r):
        """Analytic radial Laplacian u'' + (k-1) u'/r, equal to k u''(0) at the origin."""
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            lap = self.d2(r) + (k - 1) * np.where(r > 0, self.d1(r) / np.where(r > 0, r, 1.0), self.d2(0.0))
        return lap

    def transform(self, k, rho):
        """F_k u(rho) in closed form (forward normalisation with (2 pi)^{-k})."""
        R, m, a = self.support_radius, self.power, self.amplitude
        rho = np.asarray(rho, dtype=float)
        x = R * rho
        with np.errstate(divide="ignore", invalid="ignore"):
            val = (a * (2 * math.pi) ** (-k / 2) * R ** k * 2 ** m * math.factorial(m)
                   * special.jv(k / 2 + m, x) / x ** (k / 2 + m))
        # x -> 0: J_nu(x)/x^nu -> 2^{-nu}/Gamma(nu+1)
        nu = k / 2 + m
        lim = a * (2 * math.pi) ** (-k / 2) * R ** k * 2 ** m * math.factorial(m) / (2 ** nu * math.gamma(nu + 1))
        return np.where(x < 1e-8, lim, val)


def smooth_bump(radius=3.0, amplitude=1.0):
    """The C-infinity bump amp * exp(1 - 1/(1 - (r/R)^2))."""
    R = float(radius)

    def fn(r):
        q = 1.0 - (np.asarray(r, dtype=float) / R) ** 2
        with np.errstate(divide="ignore", over="ignore"):
            return np.where(q > 0, amplitude * np.exp(1.0 - 1.0 / np.where(q > 0, q, 1.0)), 0.0)

    def d1(r):
        r = np.asarray(r, dtype=float)
        q = 1.0 - (r / R) ** 2
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(q > 0, fn(r) * (-2 * r / R ** 2) / np.where(q > 0, q, 1.0) ** 2, 0.0)

    def d2(r):
        # u'' = u (q'^2/q^4 + q''/q^2 - 2 q'^2/q^3) with q = 1 - (r/R)^2
        r = np.asarray(r, dtype=float)
        q = 1.0 - (r / R) ** 2
        qs = np.where(q > 0, q, 1.0)
        dq = -2 * r / R ** 2
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(q > 0, fn(r) * (dq ** 2 / qs ** 4 - 2 / R ** 2 / qs ** 2 - 2 * dq ** 2 / qs ** 3), 0.0)

    return RadialTestFunction(fn, R, d1, d2, f"smooth(R={R:g})")


def zero_function(radius=1.0):
    z = lambda r: 0.0 * np.asarray(r, dtype=float)  # noqa: E731
    return RadialTestFunction(z, radius, z, z, "0")


# ---------------------------------------------------------------------------
# generator

def _apply_bump(spec, k, u: PolynomialBump, r, convention, cfg):
    R, m, a = u.support_radius, u.power, u.amplitude
    if a == 0.0:
        return 0.0
    mu = k / 2 + m
    nu = k / 2 - 1
    const = -a * R ** (k / 2 - m) * 2 ** m * math.factorial(m)

    def psi(rho):
        return float(symbol(spec, rho, convention))

    if r < 1e-5 * R:
        # r^{1-k/2} J_{k/2-1}(r rho) -> (rho/2)^{k/2-1} / Gamma(k/2); the error is O((r/R)^2)
        g = lambda x: psi(x) * x ** (-m) * (x / 2) ** (k / 2 - 1) / math.gamma(k / 2)  # noqa: E731
        val = integrate_bessel_product(g, mu, R, 0, 0.0, cfg)
        return const * val
    g = lambda x: psi(x) * x ** (-m)  # noqa: E731
    val = integrate_bessel_product(g, mu, R, nu, r, cfg)
    return const * r ** (1 - k / 2) * val


def _gauss_legendre_panels(lo, hi, panel, order=16):
    x, w = np.polynomial.legendre.leggauss(order)
    n = max(int(math.ceil((hi - lo) / panel)), 1)
    edges = np.linspace(lo, hi, n + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def _jv(nu, x):
    """J_nu with the elementary half-integer orders of odd dimensions done in numpy."""
    if nu == -0.5:
        return np.sqrt(2.0 / (math.pi * x)) * np.cos(x)
    if nu == 0.5:
        return np.sqrt(2.0 / (math.pi * x)) * np.sin(x)
    return special.jv(nu, x)


def _hankel_gl(u: RadialTestFunction, k, rho):
    """F_k u(rho) by composite Gauss-Legendre on [0, R], panels resolving the fastest oscillation."""
    R = u.support_radius
    nu = k / 2 - 1
    rho = np.asarray(rho, dtype=float)
    panel = min(R / 32.0, 2.0 / max(float(rho.max()), 1e-12))
    s, ws = _gauss_legendre_panels(0.0, R, panel)
    us = np.asarray(u.evaluate(s), dtype=float) * s ** (k / 2) * ws
    out = np.empty_like(rho)
    for i in range(0, len(rho), 256):
        blk = rho[i:i + 256]
        out[i:i + 256] = (_jv(nu, np.outer(blk, s)) @ us) * (2 * math.pi) ** (-k / 2) * blk ** (1 - k / 2)
    return out


def _jump_symbol(spec, rho, convention):
    """psi minus its drift part: f_jump(c rho^2 / 2)."""
    c = kernel_scale(convention)
    return np.asarray(spec.levy_measure.laplace_exponent(0.5 * c * np.asarray(rho, dtype=float) ** 2), dtype=float)


def _spectral_cutoff(spec, k, u, convention, tail_tol=1e-8, noise_tol=1e-6, cap=5000.0):
    """Smallest doubling of rho_max beyond which |psi_jump F_k u| rho^{k-1} is negligible.

    The tail integral is estimated as (largest value on [0.8, 1] rho_max) * rho_max
    and compared with the integral over the fixed head [0, 16/R].  Once the
    transform sinks into quadrature round-off the estimate stops decreasing;
    a plateau below ``noise_tol`` is accepted at the last decreasing level.
    """
    R = u.support_radius
    rho, w = _gauss_legendre_panels(0.0, 16.0 / R, min(2.0 / R, 1.0))
    dens = np.abs(_jump_symbol(spec, rho, convention) * _hankel_gl(u, k, rho)) * rho ** (k - 1)
    head = float(dens @ w) + 1e-300
    rho_max = 16.0 / R
    prev = math.inf
    while rho_max <= cap / R:
        probe = np.linspace(0.8, 1.0, 9) * rho_max
        vals = np.abs(_jump_symbol(spec, probe, convention) * _hankel_gl(u, k, probe)) * probe ** (k - 1)
        tail = float(vals.max()) * rho_max / head
        if tail <= tail_tol:
            return rho_max
        if tail >= 0.5 * prev and prev <= noise_tol:
            return rho_max / 2
        prev = tail
        rho_max *= 2
    raise NumericFailure("generator tail probe: psi * F u does not decay on the probed range", prev)


def _local_laplacian(u: RadialTestFunction, k, r_arr):
    """u'' + (k-1) u'/r, with the limit k u''(0) at the origin."""
    d2 = np.asarray(u.d2(r_arr), dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        d1r = np.where(r_arr > 0, np.asarray(u.d1(r_arr), dtype=float) / np.where(r_arr > 0, r_arr, 1.0), d2)
    return d2 + (k - 1) * d1r


def _apply_generic(spec, k, u: RadialTestFunction, r_arr, convention):
    """Drift part as a local Laplacian; jump part by the spectral route.

    Both Hankel integrals of the spectral route use composite Gauss-Legendre.
    """
    R = u.support_radius
    nu = k / 2 - 1
    out = np.zeros(len(r_arr))
    if spec.drift:
        out += spec.drift * kernel_scale(convention) / 2 * _local_laplacian(u, k, r_arr)
    if isinstance(spec.levy_measure, Null):
        return out
    rho_max = _spectral_cutoff(spec, k, u, convention)
    r_top = float(np.max(r_arr)) if len(r_arr) else 0.0
    rho, wr = _gauss_legendre_panels(0.0, rho_max, min(2.0 / (R + r_top), 1.0))
    core = _jump_symbol(spec, rho, convention) * _hankel_gl(u, k, rho) * wr
    for i, r in enumerate(r_arr):
        # rho^{k/2} J_nu(r rho) r^{1-k/2} -> rho^{k-1} 2^{-nu}/Gamma(k/2) at r = 0
        if r == 0.0:
            kern = rho ** (k - 1) / (2 ** nu * math.gamma(k / 2))
        else:
            kern = rho ** (k / 2) * _jv(nu, r * rho) * r ** (1 - k / 2)
        out[i] -= (2 * math.pi) ** (k / 2) * float(core @ kern)
    return out


def apply_generator(spec: BernsteinSpec, k, u: RadialTestFunction, r, convention="default",
                    cfg: QuadratureConfig = DEFAULT_QUAD):
    """A_k u(r) = -(2 pi)^k F_k(psi . F_k u)(r) with psi(rho) = f(c rho^2 / 2).

    Polynomial bumps use their closed-form transform and an oscillatory
    product-Bessel quadrature; other test functions use the slower spectral
    route, which requires psi * F_k u to decay within rho ~ 2000 / R.
    """
    r_arr = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(r_arr < 0):
        raise DomainError("r must be nonnegative")
    if isinstance(u, PolynomialBump):
        out = np.array([_apply_bump(spec, k, u, float(x), convention, cfg) for x in r_arr])
    else:
        out = _apply_generic(spec, k, u, r_arr, convention)
    return float(out[0]) if np.ndim(r) == 0 else out.reshape(np.shape(r))


def levy_form_generator(spec: BernsteinSpec, u: RadialTestFunction, r, convention="default", delta=1e-2,
                        cfg: QuadratureConfig = DEFAULT_QUAD):
    """A_1 u(r) from the drift and the Levy density on the line.

    A_1 u(r) = alpha (c/2) u''(r) + int_0^inf (u(r+y) + u(|r-y|) - 2 u(r)) m_1(y) dy,
    with the inner piece [0, delta] replaced by its Taylor value u''(r) int_0^delta y^2 m_1(y) dy.
    """
    c = kernel_scale(convention)
    R = u.support_radius
    r_arr = np.atleast_1d(np.asarray(r, dtype=float))

    def m1(y):
        return float(levy_density(spec, 1, y, convention))

    inner, _ = integrate(lambda y: y * y * m1(y), 0.0, delta, cfg)
    out = []
    for x in r_arr:
        u0 = float(u.evaluate(x))

        def integrand(y):
            return (float(u.evaluate(x + y)) + float(u.evaluate(abs(x - y))) - 2 * u0) * m1(y)

        kinks = sorted({p for p in (abs(R - x), R + x, x) if p > delta})
        jump = integrate(integrand, delta, math.inf, cfg, points=kinks + [2 * (R + x)])[0]
        d2 = float(u.d2(x))
        out.append(spec.drift * c / 2 * d2 + d2 * inner + jump)
    out = np.array(out)
    return float(out[0]) if np.ndim(r) == 0 else out


# ---------------------------------------------------------------------------
# intertwining

def primitive_profile(u: RadialTestFunction, cfg: QuadratureConfig = DEFAULT_QUAD):
    """v(r) = int_0^r s u(s) ds - C with C = int_0^inf s u(s) ds, so v vanishes for r >= R.

    Returned as a test function (derivative r u(r)); for a polynomial bump it
    is again a polynomial bump, -amp R^2 / (2 (m+1)) (1 - (r/R)^2)^{m+1}.
    """
    R = u.support_radius
    if isinstance(u, PolynomialBump):
        return PolynomialBump(R, u.power + 1, -u.amplitude * R ** 2 / (2 * (u.power + 1)))

    # -int_r^R s u(s) ds by a fixed composite Gauss-Legendre rule, vectorised over r
    x, w = np.polynomial.legendre.leggauss(32)
    panels = 8

    def fn(r):
        r = np.minimum(np.atleast_1d(np.asarray(r, dtype=float)), R)
        edges = r[:, None] + (R - r)[:, None] * np.linspace(0.0, 1.0, panels + 1)[None, :]
        half = 0.5 * np.diff(edges, axis=1)
        mid = 0.5 * (edges[:, 1:] + edges[:, :-1])
        s = mid[:, :, None] + half[:, :, None] * x[None, None, :]
        vals = s * np.asarray(u.evaluate(s), dtype=float)
        return -np.einsum("ijk,k,ij->i", vals, w, half)

    def d1(r):
        return np.asarray(r, dtype=float) * u.evaluate(r)

    def d2(r):
        return u.evaluate(r) + np.asarray(r, dtype=float) * u.d1(r)

    def fn_shaped(r):
        out = fn(r)
        return float(out[0]) if np.ndim(r) == 0 else out.reshape(np.shape(r))

    return RadialTestFunction(fn_shaped, R, d1, d2, f"primitive[{u.label}]")


def primitive_constant(u: RadialTestFunction, cfg: QuadratureConfig = DEFAULT_QUAD):
    return integrate(lambda s: s * float(u.evaluate(s)), 0.0, u.support_radius, cfg)[0]


def intertwine_sides(spec, k, u: RadialTestFunction, grid, convention="default", step=None,
                     cfg: QuadratureConfig = DEFAULT_QUAD):
    """(A_k u, (1/r) d/dr A_{k-2} v) on ``grid``; the outer derivative is a 5-point stencil."""
    if k < 3:
        raise DomainError("intertwining needs k >= 3")
    grid = np.asarray(grid, dtype=float)
    if np.any(grid <= 0):
        raise DomainError("intertwining grid must be positive")
    lhs = np.asarray(apply_generator(spec, k, u, grid, convention, cfg), dtype=float)
    v = primitive_profile(u, cfg)
    offsets, weights = fd_weights(1, 2)
    h = np.minimum(0.02, grid / 4.0) if step is None else np.full_like(grid, step)
    pts = grid[:, None] + h[:, None] * np.asarray(offsets, dtype=float)[None, :]
    # one call for every stencil point, so the spectral route sets up once
    vals = np.asarray(apply_generator(spec, k - 2, v, pts.ravel(), convention, cfg), dtype=float)
    rhs = vals.reshape(pts.shape) @ np.asarray(weights, dtype=float) / h / grid
    return lhs, rhs


def intertwine_check(spec, k, u: RadialTestFunction, grid=None, tol=1e-3, convention="default",
                     cfg: QuadratureConfig = DEFAULT_QUAD):
    """max |A_k u - (1/r) d/dr A_{k-2} v| relative to max |A_k u| on the grid."""
    grid = np.linspace(0.2, 2.5, 24) if grid is None else np.asarray(grid, dtype=float)
    lhs, rhs = intertwine_sides(spec, k, u, grid, convention, cfg=cfg)
    diff = np.abs(lhs - rhs)
    peak = float(np.max(np.abs(lhs)))
    err = float(diff.max() / peak) if peak > 0 else float(diff.max())
    return VerificationReport(
        "intertwining", bool(err <= tol), err, tol,
        {"min": float(grid[0]), "max": float(grid[-1]), "n": int(len(grid))},
        {"spec": spec.name or spec.levy_measure.family, "k": k, "test_function": u.label,
         "peak": peak, "argmax_r": float(grid[int(diff.argmax())])},
    )

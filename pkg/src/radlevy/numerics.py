"""Special functions, quadrature and finite differences shared by every module.

Bessel and gamma functions come from :mod:`scipy.special`; the semi-infinite
Hankel-type integrals are handled here with panels between consecutive Bessel
zeros and Euler averaging of the partial sums.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy import integrate as _integrate
from scipy import optimize, special

EPS = np.finfo(float).eps
FD_NOISE_CONSTANT = 10.0


class NumericFailure(RuntimeError):
    """A quadrature or series did not reach its tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message if residual is None else f"{message} (residual estimate {residual:.3e})")
        self.residual = residual


class ConfigurationError(ValueError):
    """Grid, order or tolerance settings that cannot produce a meaningful result."""


class DomainError(ValueError):
    """An evaluation point falls outside the domain of a function."""


@dataclass(frozen=True)
class QuadratureConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-14
    max_subdivisions: int = 200
    oscillatory_blocks: int = 400

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ConfigurationError("rel_tol and abs_tol must be positive")
        if self.max_subdivisions < 16:
            raise ConfigurationError("max_subdivisions must be at least 16")
        if self.oscillatory_blocks < 8:
            raise ConfigurationError("oscillatory_blocks must be at least 8")

    @classmethod
    def from_dict(cls, data):
        fields = {k: data[k] for k in ("rel_tol", "abs_tol", "max_subdivisions", "oscillatory_blocks") if k in data}
        return cls(**fields)


DEFAULT_QUAD = QuadratureConfig()


# ---------------------------------------------------------------------------
# special functions

def gamma(x):
    return special.gamma(x)


def bessel_j(nu, x):
    """Bessel function of the first kind J_nu(x) for real order nu >= -1/2 and x >= 0."""
    if np.any(np.asarray(nu) < -0.5):
        raise DomainError("order must be >= -1/2")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DomainError("argument must be nonnegative")
    with np.errstate(all="ignore"):
        out = special.jv(nu, x)
    bad = ~np.isfinite(out)
    # J_{-1/2} is the only admissible order that is unbounded at the origin
    if np.any(bad & ~((x == 0) & (np.asarray(nu) < 0))):
        raise NumericFailure(f"J_{nu} overflowed or returned NaN")
    return out[()] if out.ndim == 0 else out


def bessel_j_derivative(nu, x):
    """d/dx J_nu(x) via J_nu' = -(nu/x) J_nu + J_{nu-1}."""
    x = np.asarray(x, dtype=float)
    return -(nu / x) * special.jv(nu, x) + special.jv(nu - 1, x)


@lru_cache(maxsize=64)
def _zeros_cached(nu, count):
    hi = (count + abs(nu) / 2 + 2) * math.pi + 10.0
    xs = np.arange(0.05, hi, 0.05)
    vals = special.jv(nu, xs)
    idx = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
    roots = [optimize.brentq(lambda z: special.jv(nu, z), xs[i], xs[i + 1], xtol=1e-15, rtol=4 * EPS)
             for i in idx[:count]]
    return np.array(roots)


def bessel_zeros(nu, count):
    """First ``count`` positive zeros of J_nu."""
    size = 64
    while size < count:
        size *= 2
    return _zeros_cached(float(nu), size)[:count]


# ---------------------------------------------------------------------------
# quadrature

def _check_quad(value, err, info, ier, cfg, what):
    allowed = max(cfg.abs_tol, cfg.rel_tol * abs(value))
    if not np.isfinite(value):
        raise NumericFailure(f"{what}: non-finite result", err)
    if ier not in (0,) and err > 1e3 * allowed:
        raise NumericFailure(f"{what}: {info}", err)


def integrate(fn, a, b=math.inf, cfg: QuadratureConfig = DEFAULT_QUAD, points=None):
    """Adaptive quadrature of ``fn`` over [a, b] (b may be infinite).

    Returns ``(value, error_estimate)``; raises :class:`NumericFailure` when the
    error estimate stays far above the requested tolerance.
    """
    if a == b:
        return 0.0, 0.0
    if math.isinf(b) and points:
        finite_pts = sorted(p for p in points if a < p)
        edges = [a] + finite_pts
        total, total_err = 0.0, 0.0
        for lo, hi in zip(edges[:-1], edges[1:]):
            v, e = integrate(fn, lo, hi, cfg)
            total += v
            total_err += e
        v, e = integrate(fn, edges[-1], b, cfg)
        return total + v, total_err + e
    kwargs = dict(epsabs=cfg.abs_tol, epsrel=cfg.rel_tol, limit=cfg.max_subdivisions, full_output=1)
    if points is not None and not math.isinf(b):
        kwargs["points"] = [p for p in points if a < p < b]
    out = _integrate.quad(fn, a, b, **kwargs)
    value, err = out[0], out[1]
    ier = 0 if len(out) == 3 else 1
    info = out[3] if len(out) > 3 else ""
    _check_quad(value, err, info, ier, cfg, "integrate")
    return value, err


def integrate_fourier_tail(fn, a, omega, kind, cfg: QuadratureConfig = DEFAULT_QUAD):
    """Integral of fn(x)*cos(omega x) or fn(x)*sin(omega x) over [a, inf); fn must decay."""
    if omega < 0:
        omega = -omega
        if kind == "sin":
            return -integrate_fourier_tail(fn, a, omega, kind, cfg)
    if omega == 0:
        if kind == "sin":
            return 0.0
        return integrate(fn, a, math.inf, cfg)[0]
    out = _integrate.quad(fn, a, math.inf, weight=kind, wvar=omega, epsabs=cfg.abs_tol,
                          limlst=200, limit=cfg.max_subdivisions, full_output=1)
    value, err = out[0], out[1]
    if not np.isfinite(value):
        raise NumericFailure("oscillatory tail integral is not finite", err)
    return value


def euler_average(partial_sums, levels=None):
    """Euler-type acceleration: repeated averaging of neighbouring partial sums."""
    s = np.asarray(partial_sums, dtype=float)
    levels = len(s) - 1 if levels is None else min(levels, len(s) - 1)
    for _ in range(levels):
        s = 0.5 * (s[:-1] + s[1:])
    return s[-1]


def integrate_bessel(fn, nu, r, cfg: QuadratureConfig = DEFAULT_QUAD):
    """Integral of fn(s) * J_nu(s r) over s in (0, inf).

    The domain is cut at the zeros of J_nu(. r); panels are summed directly
    while they shrink fast, otherwise the alternating panel sums are
    accelerated by repeated averaging.
    """
    if r < 0:
        raise DomainError("r must be nonnegative")
    if r == 0:
        if nu == 0:
            return integrate(fn, 0.0, math.inf, cfg)[0]
        if nu > 0:
            return 0.0
        raise DomainError("J_nu(0) is infinite for negative order")

    def integrand(s):
        return fn(s) * special.jv(nu, s * r)

    blocks = cfg.oscillatory_blocks
    edges = np.concatenate(([0.0], bessel_zeros(nu, blocks + 1) / r))
    # the first panel can be long when r is small; cut it geometrically
    first = edges[1]
    pts = [first * 2.0 ** -j for j in range(1, 40) if first * 2.0 ** -j > 1e-8]
    value0, _ = integrate(integrand, 0.0, first, cfg, points=pts)
    partial = [value0]
    total = value0
    scale = abs(value0)
    small_run = 0
    accel_prev = None
    for j in range(1, blocks + 1):
        a_j, _ = integrate(integrand, edges[j], edges[j + 1], cfg)
        total += a_j
        partial.append(total)
        scale = max(scale, abs(total))
        tol = max(cfg.abs_tol, cfg.rel_tol * scale)
        small_run = small_run + 1 if abs(a_j) <= tol else 0
        if small_run >= 3:
            return total
        if j >= 12:
            accel = euler_average(partial[-12:])
            if accel_prev is not None and abs(accel - accel_prev) <= tol:
                return accel
            accel_prev = accel
    residual = abs(accel - accel_prev) if accel_prev is not None else math.nan
    raise NumericFailure("Bessel panel acceleration did not converge", residual)


def integrate_bessel_product(g, mu, a, nu, b, cfg: QuadratureConfig = DEFAULT_QUAD, split=None):
    """Integral of g(x) * J_mu(a x) * J_nu(b x) over (0, inf), a > 0, b >= 0.

    The head [0, X] is integrated panel by panel; on the tail each Bessel
    factor is written as Re[h(x) e^{i c x}] with the non-oscillatory scaled
    Hankel function h, which turns the tail into two Fourier integrals with
    frequencies a+b and a-b (b = 0 uses the small-argument limit
    J_nu(bx) -> 1 when nu = 0 and is rejected otherwise).
    """
    if a <= 0 or b < 0:
        raise DomainError("need a > 0 and b >= 0")
    if b == 0 and nu != 0:
        raise DomainError("J_nu(0) vanishes or diverges for nu != 0; pass the limit form instead")
    lo = min(a, b) if b > 0 else a
    # the Hankel-function split is exact, so the head only has to reach the
    # regime where the amplitudes are smooth; capping it at 4000/a trades a
    # little cancellation for b << a against an unbounded panel count
    x_split = split if split is not None else max(min(40.0 / lo, 4000.0 / a), 60.0 / (a + b), 8.0)
    w_hi = a + b
    panel = math.pi / w_hi
    n_panels = int(math.ceil(x_split / panel))
    if n_panels > 100_000:
        raise DomainError(f"b/a = {b / a:.3g} is too small for the product rule; use the b -> 0 limit form")
    edges = np.linspace(0.0, n_panels * panel, n_panels + 1)
    x_split = edges[-1]

    if b > 0:
        def head(x):
            return g(x) * special.jv(mu, a * x) * special.jv(nu, b * x)
    else:
        def head(x):
            return g(x) * special.jv(mu, a * x)

    head_cfg = QuadratureConfig(cfg.rel_tol, cfg.abs_tol * 1e-2, cfg.max_subdivisions, cfg.oscillatory_blocks)
    total = 0.0
    for lo_e, hi_e in zip(edges[:-1], edges[1:]):
        total += integrate(head, lo_e, hi_e, head_cfg)[0]

    if b > 0:
        def amp_sum(x):
            return g(x) * special.hankel1e(mu, a * x) * special.hankel1e(nu, b * x)

        def amp_diff(x):
            return g(x) * special.hankel1e(mu, a * x) * np.conj(special.hankel1e(nu, b * x))

        parts = [(amp_sum, a + b), (amp_diff, a - b)]
        weight = 0.5
    else:
        parts = [(lambda x: g(x) * special.hankel1e(mu, a * x), a)]
        weight = 1.0

    tail_cfg = QuadratureConfig(cfg.rel_tol, max(cfg.abs_tol, 1e-15), cfg.max_subdivisions, cfg.oscillatory_blocks)
    tail = 0.0
    for amp, w in parts:
        re = integrate_fourier_tail(lambda x: amp(x).real, x_split, w, "cos", tail_cfg)
        im = integrate_fourier_tail(lambda x: amp(x).imag, x_split, w, "sin", tail_cfg)
        tail += weight * (re - im)
    return total + tail


# ---------------------------------------------------------------------------
# finite differences

@lru_cache(maxsize=None)
def fd_weights(order, half_width):
    """Exact central-difference weights on offsets -m..m.

    Solves sum_j w_j o_j^p / p! = [p == order] for p < 2m+1 in rational arithmetic.
    """
    offsets = list(range(-half_width, half_width + 1))
    n_pts = len(offsets)
    if order >= n_pts:
        raise ConfigurationError(f"stencil of {n_pts} points cannot resolve order {order}")
    rows = [[Fraction(o) ** p / math.factorial(p) for o in offsets] + [Fraction(int(p == order))]
            for p in range(n_pts)]
    for col in range(n_pts):
        piv = next(i for i in range(col, n_pts) if rows[i][col] != 0)
        rows[col], rows[piv] = rows[piv], rows[col]
        pv = rows[col][col]
        rows[col] = [v / pv for v in rows[col]]
        for i in range(n_pts):
            if i != col and rows[i][col] != 0:
                f = rows[i][col]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[col])]
    return tuple(offsets), tuple(float(row[-1]) for row in rows)


def default_half_width(order):
    return (order + 1) // 2


def finite_diff(fn, x, order, h, lower=None, upper=None, half_width=None):
    """Central-difference estimate of the ``order``-th derivative of ``fn`` at ``x``.

    The default stencil is the narrowest central one with O(h^2) truncation
    error; pass ``half_width`` for wider, higher-order stencils.
    ``lower``/``upper`` bound the domain of ``fn``; a stencil leaving it raises
    :class:`DomainError`.
    """
    if not 0 <= order <= 8:
        raise ConfigurationError("derivative order must be between 0 and 8")
    if h <= 0:
        raise ConfigurationError("step must be positive")
    m = default_half_width(order) if half_width is None else half_width
    offsets, weights = fd_weights(order, m)
    lo_pt, hi_pt = x - m * h, x + m * h
    if (lower is not None and lo_pt < lower) or (upper is not None and hi_pt > upper):
        raise DomainError(f"stencil [{lo_pt}, {hi_pt}] leaves the domain")
    total = 0.0
    for o, w in zip(offsets, weights):
        if w != 0.0:
            total += w * fn(x + o * h)
    return total / h ** order


def fd_noise_floor(order, h, scale=1.0, constant=FD_NOISE_CONSTANT):
    """Documented noise floor C*eps*scale/h^n + C*h^2 of an order-n difference."""
    return constant * EPS * scale / h ** order + constant * h ** 2


# ---------------------------------------------------------------------------
# radial geometry

def sphere_area(k):
    """Surface area 2 pi^{k/2} / Gamma(k/2) of the unit sphere in R^k."""
    return 2.0 * math.pi ** (k / 2) / math.gamma(k / 2)

"""Transition densities p_t^k and Levy densities m_k of subordinated Brownian motion.

Two routes for p_t^k:

* mixture: p_t^k(r) = E[ g_k(r, S_t); S_t > 0 ] with the Gaussian kernel g_k,
* fourier: the radial Fourier transform of rho -> exp(-t psi(rho)).

Kernel conventions.  ``default`` uses g_k(r, s) = (4 pi s)^{-k/2} exp(-r^2/(4s)),
i.e. Brownian motion run at twice the usual speed, so that the characteristic
exponent is psi(xi) = f(|xi|^2).  ``paper-literal`` uses the standard heat
kernel (2 pi s)^{-k/2} exp(-r^2/(2s)), whose characteristic exponent is
f(|xi|^2/2).  Both are g_k(r, s) = (2 pi c s)^{-k/2} exp(-r^2/(2 c s)) with
c = 2 and c = 1 respectively.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .bernstein import BernsteinSpec, ExponentialCP, FiniteAtomic, Null, hartman_wintner
from .numerics import DEFAULT_QUAD, DomainError, QuadratureConfig, fd_noise_floor, fd_weights, sphere_area
from .radial import RadialProfile, fourier_radial, montee, radial_mass
from .reports import VerificationReport
from .subordinator import LOG_GRID, SubordinatorModel, UnsupportedDensity, atom_weight, log_trapezoid

CONVENTIONS = {"default": 2.0, "paper-literal": 1.0}


class PreconditionError(DomainError):
    """A mathematical precondition of the requested computation does not hold."""


def kernel_scale(convention="default"):
    try:
        return CONVENTIONS[convention]
    except KeyError:
        raise DomainError(f"unknown convention {convention!r}; choose from {sorted(CONVENTIONS)}") from None


def as_model(obj):
    if isinstance(obj, SubordinatorModel):
        return obj
    if isinstance(obj, BernsteinSpec):
        return SubordinatorModel(obj)
    raise TypeError(f"expected a SubordinatorModel or BernsteinSpec, got {type(obj).__name__}")


def log_kernel(k, r, s, c):
    """log g_k(r, s) on the outer product of r (m,) and s (n,)."""
    r = np.atleast_1d(np.asarray(r, dtype=float))[:, None]
    s = np.asarray(s, dtype=float)[None, :]
    return -0.5 * k * np.log(2 * math.pi * c * s) - r * r / (2 * c * s)


def _scalar_or_array(r, out):
    return float(out[0]) if np.ndim(r) == 0 else out.reshape(np.shape(r))


# ---------------------------------------------------------------------------
# densities

def density_mixture(model, k, t, r, convention="default"):
    """p_t^k(r) as a Gaussian mixture against the law of S_t (atom at zero excluded)."""
    model = as_model(model)
    if t <= 0:
        raise DomainError("t must be positive")
    c = kernel_scale(convention)
    r_arr = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(r_arr < 0):
        raise DomainError("r must be nonnegative")
    out = model.expect(t, lambda s: log_kernel(k, r_arr, s, c))
    return _scalar_or_array(r, np.asarray(out, dtype=float))


def symbol(spec: BernsteinSpec, rho, convention="default"):
    """psi(rho) = f(c rho^2 / 2) for the active kernel convention."""
    c = kernel_scale(convention)
    return spec.closed_form(0.5 * c * np.asarray(rho, dtype=float) ** 2)


def fourier_integrable(spec: BernsteinSpec, k, t, convention="default", probe=(1e4, 1e6, 1e8)):
    """Tail probe: exp(-t psi(rho)) decays faster than rho^{-k}, so it is integrable on R^k."""
    rho = np.asarray(probe, dtype=float)
    log_v = -t * np.asarray(symbol(spec, rho, convention), dtype=float)
    slopes = np.diff(log_v) / np.diff(np.log(rho))
    return bool(np.all(slopes < -k - 1e-3))


def density_fourier(spec, k, t, r, convention="default", cfg: QuadratureConfig = DEFAULT_QUAD):
    """p_t^k(r) by radial Fourier inversion of exp(-t psi).

    With the forward transform carrying (2 pi)^{-k}, the density is the
    forward transform of the characteristic function, i.e. (2 pi)^{-k}
    times its inverse transform.
    """
    if isinstance(spec, SubordinatorModel):
        spec = spec.spec
    if t <= 0:
        raise DomainError("t must be positive")
    if not fourier_integrable(spec, k, t, convention):
        verdict = hartman_wintner(spec).verdict
        raise PreconditionError(
            f"exp(-t psi) is not integrable on R^{k} at t={t}: the Hartman-Wintner condition "
            f"({verdict} for this model) is needed for the Fourier route; use route=mixture")
    phi = RadialProfile(k, lambda rho: np.exp(-t * np.asarray(symbol(spec, rho, convention), dtype=float)),
                        label="exp(-t psi)")
    return fourier_radial(phi, r, cfg)


@dataclass(frozen=True)
class TransitionDensity:
    """Law of X_t: an atom of weight ``atom_weight`` at 0 plus the density ``profile``."""

    dim: int
    time: float
    atom_weight: float
    profile: RadialProfile
    route: str
    convention: str
    model: str = ""

    def __call__(self, r):
        return self.profile(r)

    def header(self):
        return {"model": self.model, "k": self.dim, "t": self.time, "atom_weight": self.atom_weight,
                "convention": self.convention, "route": self.route}

    def mass(self, cfg: QuadratureConfig = DEFAULT_QUAD):
        return radial_mass(self.profile, cfg=cfg)

    def to_csv(self, path=None, grid=None):
        text = "# " + json.dumps(self.header(), sort_keys=True) + "\n" + self.profile.to_csv(grid=grid)
        if path is None:
            return text
        with open(path, "w", newline="") as fh:
            fh.write(text)
        return path


def transition_density(model, k, t, route="mixture", convention="default", grid=None,
                       cfg: QuadratureConfig = DEFAULT_QUAD):
    model = as_model(model)
    if route == "mixture":
        fn = lambda r: density_mixture(model, k, t, r, convention)  # noqa: E731
    elif route == "fourier":
        if not fourier_integrable(model.spec, k, t, convention):
            density_fourier(model.spec, k, t, 0.0, convention, cfg)  # raises the precondition error

        def fn(r):
            return density_fourier(model.spec, k, t, r, convention, cfg)
    else:
        raise DomainError(f"unknown route {route!r}")
    prof = RadialProfile(k, fn, grid=grid, label=f"p[{model.name},k={k},t={t}]")
    return TransitionDensity(k, float(t), atom_weight(model, t), prof, route, convention, model.name)


def closed_form_density(name, k, t, convention="default"):
    """Closed-form p_t^k for the Gaussian (drift) and Cauchy (stable 1/2) families."""
    c = kernel_scale(convention)
    if name == "gaussian":
        var = c * t

        def fn(r):
            return (2 * math.pi * var) ** (-k / 2) * np.exp(-np.asarray(r) ** 2 / (2 * var))

        def dfn(r):
            return -np.asarray(r) / var * fn(r)
        return RadialProfile(k, fn, derivative=dfn, label=f"gauss[k={k},t={t}]")
    if name == "cauchy":
        # exponent sqrt(c/2) |xi|: Cauchy with scale a = t sqrt(c/2)
        a = t * math.sqrt(c / 2)
        ck = math.gamma((k + 1) / 2) / math.pi ** ((k + 1) / 2)

        def fn(r):
            return ck * a / (a * a + np.asarray(r) ** 2) ** ((k + 1) / 2)

        def dfn(r):
            r = np.asarray(r)
            return -(k + 1) * r * ck * a / (a * a + r ** 2) ** ((k + 3) / 2)
        return RadialProfile(k, fn, derivative=dfn, label=f"cauchy[k={k},t={t}]")
    raise KeyError(name)


def origin_value(model, k, t, convention="default"):
    """lim_{r->0} p_t^k(r) = (2 pi c)^{-k/2} E[S_t^{-k/2}; S_t > 0] (may be infinite)."""
    return float(density_mixture(model, k, t, 0.0, convention))


# ---------------------------------------------------------------------------
# Levy densities

@dataclass(frozen=True)
class LevyDensity:
    dim: int
    profile: RadialProfile
    convention: str = "default"
    model: str = ""

    def __call__(self, r):
        return self.profile(r)

    def header(self):
        return {"model": self.model, "k": self.dim, "convention": self.convention, "kind": "levy-density"}

    def to_csv(self, path=None, grid=None):
        text = "# " + json.dumps(self.header(), sort_keys=True) + "\n" + self.profile.to_csv(grid=grid)
        if path is None:
            return text
        with open(path, "w", newline="") as fh:
            fh.write(text)
        return path


def _measure_expect(model, log_g):
    """int g(y) mu(dy) for the Levy measure of the model, g given by its log on a leading axis."""
    lm = model.measure
    if isinstance(lm, Null):
        return np.zeros(np.shape(log_g(np.array([1.0])))[:-1])
    if isinstance(lm, FiniteAtomic):
        ys = np.array([y for y, _ in lm.atoms])
        ws = np.array([w for _, w in lm.atoms])
        return (np.exp(log_g(ys)) * ws).sum(axis=-1)
    if not hasattr(lm, "log_density"):
        raise UnsupportedDensity(f"Levy measure of {model.name} has no density")
    y = np.exp(LOG_GRID)
    with np.errstate(divide="ignore"):
        logw = lm.log_density(y) + LOG_GRID
    logs = log_g(y) + logw
    flat = logs.reshape(-1, logs.shape[-1])
    return np.array([log_trapezoid(row, 0.1) for row in flat]).reshape(logs.shape[:-1])


def levy_density(model, k, r, convention="default"):
    """m_k(r) = int g_k(r, s) mu(ds)."""
    model = as_model(model)
    c = kernel_scale(convention)
    r_arr = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(r_arr < 0):
        raise DomainError("r must be nonnegative")
    out = _measure_expect(model, lambda s: log_kernel(k, r_arr, s, c))
    return _scalar_or_array(r, np.asarray(out, dtype=float))


def levy_profile(model, k, convention="default", grid=None):
    model = as_model(model)
    prof = RadialProfile(k, lambda r: levy_density(model, k, r, convention), grid=grid,
                         label=f"m[{model.name},k={k}]")
    return LevyDensity(k, prof, convention, model.name)


def _log_shell_prob(k, a, b, s, c):
    """log P(a < |sqrt(c s) Z| < b) for Z standard normal in R^k, on s (n,)."""
    x_a = a * a / (c * s)
    x_b = b * b / (c * s) if math.isfinite(b) else np.full_like(s, np.inf)
    with np.errstate(divide="ignore", invalid="ignore"):
        # difference of survival functions is accurate for small s, of cdfs for large s
        lo = stats.chi2.logsf(x_a, k)
        hi = stats.chi2.logsf(x_b, k)
        diff_sf = lo + np.log1p(-np.exp(np.minimum(hi - lo, 0.0)))
        lc_b = stats.chi2.logcdf(x_b, k)
        lc_a = stats.chi2.logcdf(x_a, k)
        diff_cdf = lc_b + np.log1p(-np.exp(np.minimum(lc_a - lc_b, 0.0)))
    use_cdf = x_a < k
    out = np.where(use_cdf, diff_cdf, diff_sf)
    return np.where(np.isnan(out), -np.inf, out)


def shell_probability(model, k, t, a, b, convention="default"):
    """P(a < |X_t| < b) for 0 < a < b, through the law of S_t."""
    model = as_model(model)
    c = kernel_scale(convention)
    if a <= 0:
        raise DomainError("shells must be bounded away from the origin")
    return float(model.expect(t, lambda s: _log_shell_prob(k, a, b, s, c)[None, :])[0])


def levy_shell_mass(model, k, a, b, convention="default"):
    """nu_k({a < |y| < b}) by radial quadrature of m_k."""
    return radial_mass(levy_profile(model, k, convention).profile, a, b)


# ---------------------------------------------------------------------------
# checks

def default_check_grid(lo=0.01, hi=10.0, n=200):
    return np.geomspace(lo, hi, n)


def _walk_report(identity, lower_profile, upper_profile, grid, tol, details):
    lifted = np.asarray(montee(lower_profile)(grid), dtype=float)
    target = np.asarray(upper_profile(grid), dtype=float)
    peak = float(np.max(np.abs(target)))
    abs_err = np.abs(lifted - target)
    rel_to_peak = float(abs_err.max() / peak) if peak > 0 else float(abs_err.max())
    with np.errstate(divide="ignore", invalid="ignore"):
        pointwise = np.where(target != 0, abs_err / np.abs(target), np.where(abs_err == 0, 0.0, np.inf))
    return VerificationReport(
        identity=identity,
        passed=bool(rel_to_peak <= tol),
        max_error=rel_to_peak,
        tolerance=tol,
        grid={"min": float(grid[0]), "max": float(grid[-1]), "n": int(len(grid))},
        details={**details, "peak": peak, "max_pointwise_relative": float(pointwise.max()),
                 "argmax_r": float(grid[int(abs_err.argmax())])},
    )


def dimwalk_check(lower: TransitionDensity, upper: TransitionDensity, grid=None, tol=1e-4):
    """montee(p_t^k) against p_t^{k+2}, error relative to the peak of p_t^{k+2}."""
    if upper.dim != lower.dim + 2:
        raise DomainError(f"dimension mismatch: {lower.dim} -> {upper.dim} (need a step of 2)")
    if lower.time != upper.time:
        raise DomainError("dimension walk compares densities at the same time")
    grid = default_check_grid() if grid is None else np.asarray(grid, dtype=float)
    return _walk_report("dimension-walk", lower.profile, upper.profile, grid, tol,
                        {"lower": lower.model, "upper": upper.model, "k": lower.dim, "t": lower.time})


def levy_dimwalk_check(lower: LevyDensity, upper: LevyDensity, grid=None, tol=1e-4):
    if upper.dim != lower.dim + 2:
        raise DomainError(f"dimension mismatch: {lower.dim} -> {upper.dim} (need a step of 2)")
    grid = default_check_grid(0.1, 10.0) if grid is None else np.asarray(grid, dtype=float)
    return _walk_report("levy-dimension-walk", lower.profile, upper.profile, grid, tol,
                        {"lower": lower.model, "upper": upper.model, "k": lower.dim})


def unimodality_check(td, grid=None, rel_step=1e-4):
    """Central-difference slopes of the profile are <= the noise floor on ``grid``."""
    prof = td.profile if hasattr(td, "profile") else td
    grid = default_check_grid(1e-3, 12.0) if grid is None else np.asarray(grid, dtype=float)
    offsets, weights = fd_weights(1, 2)
    h = rel_step * np.maximum(grid, 1e-2)
    h = np.minimum(h, grid / 3.0)
    samples = np.array([np.asarray(prof(grid + o * h), dtype=float) for o in offsets])
    slope = (np.asarray(weights)[:, None] * samples).sum(axis=0) / h
    scale = np.abs(weights).sum() * np.abs(samples).max(axis=0)
    floor = np.array([fd_noise_floor(1, hi, si) for hi, si in zip(h, scale)])
    excess = slope - floor
    worst = int(np.argmax(excess))
    return VerificationReport(
        identity="unimodality",
        passed=bool(np.all(excess <= 0)),
        max_error=float(max(0.0, excess.max())),
        tolerance=0.0,
        grid={"min": float(grid[0]), "max": float(grid[-1]), "n": int(len(grid))},
        details={"max_slope": float(slope.max()), "worst_r": float(grid[worst]),
                 "n_violations": int((excess > 0).sum())},
    )


def normalization_check(td: TransitionDensity, tol=1e-6, cfg: QuadratureConfig = DEFAULT_QUAD):
    mass = td.mass(cfg)
    err = abs(td.atom_weight + mass - 1.0)
    return VerificationReport("normalization", bool(err <= tol), float(err), tol, {},
                              {"mass": mass, "atom_weight": td.atom_weight, "model": td.model,
                               "k": td.dim, "t": td.time})


def scaled_profile(td: TransitionDensity):
    """g(r) = p_t^k(2 sqrt(r)), completely monotone in r."""
    return lambda r: float(td.profile(2.0 * math.sqrt(r)))


def scaled_cm_check(td: TransitionDensity, grid=None, n_max=4):
    from .bernstein import check_cm
    grid = np.geomspace(0.05, 5.0, 25) if grid is None else grid
    rep = check_cm(scaled_profile(td), grid, n_max)
    rep.details.update({"model": td.model, "k": td.dim, "t": td.time})
    return rep


def cm_ladder_check(model, t, orders=(1, 2), grid=None, tol=1e-3, convention="default"):
    """d^n/dr^n g_t^1 = (-4 pi)^n g_t^{1+2n}, derivatives by finite differences."""
    model = as_model(model)
    grid = np.geomspace(0.1, 5.0, 40) if grid is None else np.asarray(grid, dtype=float)
    worst = 0.0
    per_order = {}
    for n in orders:
        offsets, weights = fd_weights(n, 3)
        h = 2e-3 * grid
        pts = np.concatenate([grid + o * h for o in offsets])
        vals = density_mixture(model, 1, t, 2.0 * np.sqrt(pts), convention).reshape(len(offsets), -1)
        deriv = (np.asarray(weights)[:, None] * vals).sum(axis=0) / h ** n
        target = (-4 * math.pi) ** n * density_mixture(model, 1 + 2 * n, t, 2.0 * np.sqrt(grid), convention)
        rel = float(np.max(np.abs(deriv - target) / np.abs(target)))
        per_order[f"order_{n}"] = rel
        worst = max(worst, rel)
    return VerificationReport("cm-ladder", bool(worst <= tol), worst, tol,
                              {"min": float(grid[0]), "max": float(grid[-1]), "n": int(len(grid))},
                              {"model": model.name, "t": t, **per_order})


def mixture_identity_check(model, t, grid=None, tol=1e-5):
    """exp(-t f(r^2)) = e^{-ct} + sqrt(4 pi) int s^{-1/2} e^{-r^2/s} mu_t(ds).

    mu_t is realised as the law of 1/S_t weighted by s^{1/2}/sqrt(4 pi), so the
    right side is evaluated as E[exp(-r^2 S_t); S_t > 0] plus the atom.
    """
    model = as_model(model)
    grid = np.linspace(0.0, 5.0, 51) if grid is None else np.asarray(grid, dtype=float)
    lhs = np.exp(-t * np.asarray(model.spec.closed_form(grid ** 2), dtype=float))

    def log_g(s):
        # sqrt(4 pi) * sigma^{-1/2} e^{-r^2/sigma} * sigma^{1/2}/sqrt(4 pi) at sigma = 1/s
        return -np.outer(grid ** 2, s)
    rhs = atom_weight(model, t) + model.expect(t, log_g)
    err = float(np.max(np.abs(lhs - rhs)))
    return VerificationReport("mixture-identity", bool(err <= tol), err, tol,
                              {"min": float(grid[0]), "max": float(grid[-1]), "n": int(len(grid))},
                              {"model": model.name, "t": t})


VAGUE_TIMES = (0.2, 0.1, 0.05, 0.025)


def richardson(times, values):
    """Extrapolate values(t) to t -> 0 for times halving at each step.

    The order p comes from the three coarsest values; it is used only when
    it lies in [0.5, 4] and the finest pair of differences agrees with it.
    Returns (limit, order or None).
    """
    v = np.asarray(values, dtype=float)
    d = -np.diff(v)  # V(t_i) - V(t_{i+1})
    if len(v) < 3 or np.any(d[:2] == 0):
        return float(v[-1]), None
    ratio = d[0] / d[1]
    if ratio <= 0:
        return float(v[-1]), None
    p = math.log2(ratio)
    if not 0.5 <= p <= 4.0:
        return float(v[-1]), None
    if len(d) >= 3 and d[2] != 0:
        q = d[1] / d[2]
        if q <= 0 or abs(math.log2(q) - p) > 0.5:
            return float(v[-1]), None
    # V(t) = L + A t^p: L = V(t_n) - (V(t_{n-1}) - V(t_n)) / (2^p - 1)
    return float(v[-1] - d[-1] / (2.0 ** p - 1.0)), p


def vague_limit_check(model, k, shells, convention="default", times=VAGUE_TIMES, tol=2e-2, abs_floor=1e-3):
    """t^{-1} P(X_t in shell) extrapolated to t -> 0 against nu_k(shell)."""
    model = as_model(model)
    results = []
    worst = 0.0
    passed = True
    for a, b in shells:
        if a <= 0:
            raise DomainError("shells must be bounded away from the origin")
        vals = [shell_probability(model, k, t, a, b, convention) / t for t in times]
        limit, order = richardson(times, vals)
        target = levy_shell_mass(model, k, a, b, convention)
        if target == 0:
            err = abs(limit)
            ok = err <= abs_floor
        else:
            err = abs(limit - target) / abs(target)
            ok = err <= tol
        passed &= ok
        worst = max(worst, err)
        results.append({"shell": [a, b], "values": vals, "extrapolated": limit, "order": order,
                        "levy_mass": target, "error": err, "passed": ok})
    return VerificationReport("vague-limit", bool(passed), float(worst), tol, {"times": list(times)},
                              {"model": model.name, "k": k, "shells": results})

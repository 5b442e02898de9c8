"""Monte-Carlo realisations of X_t = B(S_t) and the statistical checks built on them.

Randomness: the seed feeds a SeedSequence that is split into one child stream
per fixed-size chunk of samples.  Chunks may run on several threads, but the
chunk layout never depends on the thread count, so results are reproducible
for a given (seed, n).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from scipy.signal import fftconvolve

from .bernstein import ExponentialCP, hartman_wintner
from .numerics import DomainError
from .radial import radial_mass
from .reports import SimulationReport
from .subordinator import atom_rate, atom_weight, neg_moment, sample
from .transition import (
    PreconditionError,
    as_model,
    density_mixture,
    kernel_scale,
    levy_shell_mass,
    transition_density,
)

CHUNK = 1 << 14


def _chunks(n, seed):
    sizes = [CHUNK] * (n // CHUNK) + ([n % CHUNK] if n % CHUNK else [])
    children = np.random.SeedSequence(seed).spawn(len(sizes))
    return list(zip(sizes, children))


def _run_chunks(fn, n, seed, threads=1):
    if n < 1:
        raise DomainError("sample count n must be at least 1")
    jobs = _chunks(n, seed)
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda job: fn(job[0], np.random.default_rng(job[1])), jobs))
    else:
        parts = [fn(size, np.random.default_rng(child)) for size, child in jobs]
    return np.concatenate(parts)


def sample_subordinator(model, t, n, seed=0, threads=1):
    """n independent draws of S_t."""
    model = as_model(model)
    return _run_chunks(lambda size, rng: sample(model, t, rng, size), n, seed, threads)


def sample_subordinated(model, k, t, n, seed=0, convention="default", threads=1, return_subordinator=False):
    """n draws of X_t in R^k as sqrt(c S_t) Z, Z standard normal in R^k.

    c = 2 under the default convention (law with characteristic exponent
    f(|xi|^2)), c = 1 under ``paper-literal``.
    """
    model = as_model(model)
    c = kernel_scale(convention)

    def draw(size, rng):
        s = sample(model, t, rng, size)
        z = rng.standard_normal((size, k))
        return np.concatenate([s[:, None], np.sqrt(c * s)[:, None] * z], axis=1)

    out = _run_chunks(draw, n, seed, threads)
    return (out[:, 1:], out[:, 0]) if return_subordinator else out[:, 1:]


def samples_to_csv(t, samples, path=None):
    """Subordinator samples as CSV with columns t,sample."""
    lines = ["t,sample"] + [f"{float(t)!r},{float(v)!r}" for v in np.ravel(samples)]
    text = "\n".join(lines) + "\n"
    if path is None:
        return text
    with open(path, "w", newline="") as fh:
        fh.write(text)
    return path


def _report(model, k, t, n, seed, statistic, observed, predicted, tolerance, passed, **details):
    return SimulationReport(model=model.name, k=k, t=t, n=n, seed=seed, statistic=statistic,
                            observed=float(observed), predicted=float(predicted),
                            tolerance=float(tolerance), passed=bool(passed), details=details)


# ---------------------------------------------------------------------------
# law checks

def laplace_check(model, t, n=100_000, seed=0, us=(0.5, 1.0, 2.0), threads=1):
    """Empirical E exp(-u S_t) against exp(-t f(u)) within 3 standard errors."""
    model = as_model(model)
    s = sample_subordinator(model, t, n, seed, threads)
    out = []
    for u in us:
        v = np.exp(-u * s)
        mean = math.fsum(v) / n
        se = float(v.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        pred = math.exp(-t * float(model.spec.closed_form(u)))
        tol = max(3 * se, 1e-12)
        out.append(_report(model, 0, t, n, seed, f"laplace-transform(u={u})", mean, pred, tol,
                           abs(mean - pred) <= tol, standard_error=se))
    return out


def atom_check(model, t, n=100_000, seed=0, threads=1):
    """Fraction of exact zeros of S_t against exp(-c t); exactly zero when c is infinite."""
    model = as_model(model)
    s = sample_subordinator(model, t, n, seed, threads)
    zeros = int(np.count_nonzero(s == 0.0))
    frac = zeros / n
    p = atom_weight(model, t)
    if p == 0.0:
        return _report(model, 0, t, n, seed, "zero-fraction", frac, 0.0, 0.0, zeros == 0,
                       zeros=zeros, atom_rate="inf")
    se = math.sqrt(p * (1 - p) / n)
    return _report(model, 0, t, n, seed, "zero-fraction", frac, p, 3 * se, abs(frac - p) <= 3 * se,
                   zeros=zeros, standard_error=se, atom_rate=atom_rate(model))


def radial_shell_edges(radii, bins):
    """bins-1 equal-width shells up to the 95% quantile of ``radii``, plus an overflow shell."""
    r_max = float(np.quantile(radii, 0.95)) if len(radii) else 1.0
    r_max = r_max if r_max > 0 else 1.0
    return np.concatenate((np.linspace(0.0, r_max, bins), [np.inf]))


def empirical_density_check(model, k, t, n=100_000, bins=40, seed=0, convention="default", threads=1):
    """Radial histogram of X_t against shell masses of p_t^k, plus the atom at the origin.

    Passes iff the total variation over shells is at most 4 sqrt(bins/n) and
    the exact-zero fraction lies within 3 standard errors of exp(-c t).
    """
    model = as_model(model)
    if n < 10_000:
        raise DomainError("empirical density check needs n >= 10^4")
    x = sample_subordinated(model, k, t, n, seed, convention, threads)
    radii = np.sqrt(np.einsum("ij,ij->i", x, x))
    zero = radii == 0.0
    edges = radial_shell_edges(radii[~zero], bins)
    counts = np.histogram(radii[~zero], bins=edges)[0]
    emp = counts / n
    td = transition_density(model, k, t, convention=convention)
    p0 = td.atom_weight
    pred = np.array([radial_mass(td.profile, a, b) for a, b in zip(edges[:-2], edges[1:-1])])
    pred = np.append(pred, max(0.0, 1.0 - p0 - pred.sum()))
    tv = 0.5 * float(np.abs(emp - pred).sum())
    budget = 4.0 * math.sqrt(bins / n)
    frac = float(zero.mean())
    se = math.sqrt(p0 * (1 - p0) / n)
    atom_ok = (frac == 0.0) if p0 == 0.0 else abs(frac - p0) <= 3 * se
    return _report(model, k, t, n, seed, "radial-histogram-tv", tv, 0.0, budget, tv <= budget and atom_ok,
                   bins=bins, r_max=float(edges[-2]), zero_fraction=frac, atom_weight=p0,
                   atom_standard_error=se, atom_passed=bool(atom_ok), convention=convention)


def jump_count_check(model, k, t, shells, n_paths=100_000, seed=0, convention="default", threads=1):
    """Jump counts of a compound-Poisson X over [0, t], shell by shell.

    Each subordinator jump y moves X by sqrt(c y) Z.  The count in a shell B
    must be Poisson with mean t nu_k(B): mean and variance within 3 standard
    errors, the no-jump fraction of the full space equal to exp(-lambda t),
    disjoint shells uncorrelated, and {X_t = 0} = {no jumps} path by path.
    """
    model = as_model(model)
    lm = model.measure
    if not isinstance(lm, ExponentialCP) or model.spec.drift != 0:
        raise DomainError("jump_count_check needs a driftless ExponentialCP model")
    c = kernel_scale(convention)
    lam, beta = lm.intensity, lm.jump_rate
    shells = [(float(a), float(b)) for a, b in shells]

    def draw(size, rng):
        n_jumps = rng.poisson(lam * t, size)
        total = int(n_jumps.sum())
        y = rng.exponential(1.0 / beta, total)
        dx = np.sqrt(c * y)[:, None] * rng.standard_normal((total, k))
        size_ = np.sqrt(np.einsum("ij,ij->i", dx, dx))
        owner = np.repeat(np.arange(size), n_jumps)
        cols = [n_jumps.astype(float)]
        for a, b in shells:
            inside = (size_ > a) & (size_ < b)
            cols.append(np.bincount(owner[inside], minlength=size).astype(float))
        end = np.zeros((size, k))
        np.add.at(end, owner, dx)
        cols.append((np.abs(end).sum(axis=1) == 0.0).astype(float))
        return np.stack(cols, axis=1)

    data = _run_chunks(draw, n_paths, seed, threads)
    n_jumps, counts, at_zero = data[:, 0], data[:, 1:-1], data[:, -1].astype(bool)
    n = n_paths
    reports = []
    p_none = math.exp(-lam * t)
    frac = float(np.mean(n_jumps == 0))
    se = math.sqrt(p_none * (1 - p_none) / n)
    reports.append(_report(model, k, t, n, seed, "no-jump-fraction", frac, p_none, 3 * se,
                           abs(frac - p_none) <= 3 * se, standard_error=se))
    mismatch = int(np.count_nonzero(at_zero != (n_jumps == 0)))
    reports.append(_report(model, k, t, n, seed, "zero-iff-no-jump", mismatch, 0, 0, mismatch == 0))
    means = []
    for j, (a, b) in enumerate(shells):
        mu = t * (lam if (a == 0 and math.isinf(b)) else levy_shell_mass(model, k, a, b, convention))
        means.append(mu)
        col = counts[:, j]
        m_obs = math.fsum(col) / n
        se_m = math.sqrt(mu / n)
        reports.append(_report(model, k, t, n, seed, f"count-mean[{a},{b}]", m_obs, mu, 3 * se_m,
                               abs(m_obs - mu) <= 3 * se_m, standard_error=se_m))
        v_obs = float(col.var(ddof=1))
        se_v = math.sqrt((mu + 2 * mu * mu) / n)
        reports.append(_report(model, k, t, n, seed, f"count-variance[{a},{b}]", v_obs, mu, 3 * se_v,
                               abs(v_obs - mu) <= 3 * se_v, standard_error=se_v))
    for i in range(len(shells)):
        for j in range(i + 1, len(shells)):
            (a1, b1), (a2, b2) = shells[i], shells[j]
            if not (b1 <= a2 or b2 <= a1):
                continue
            cov = float(np.cov(counts[:, i], counts[:, j])[0, 1])
            se_c = math.sqrt(means[i] * means[j] / n)
            reports.append(_report(model, k, t, n, seed, f"count-covariance[{a1},{b1}]x[{a2},{b2}]", cov, 0.0,
                                   3 * se_c, abs(cov) <= 3 * se_c, standard_error=se_c))
    return reports


# ---------------------------------------------------------------------------
# gradient estimate

def chirp(x, z_max=6.0):
    """sin(z^2) for |z| <= z_max, continued with constant frequency beyond."""
    x = np.asarray(x, dtype=float)
    a = np.abs(x)
    phase = np.where(a <= z_max, a * a, z_max * z_max + 2 * z_max * (a - z_max))
    return np.sin(phase)


DEFAULT_TEST_FUNCTIONS = {
    "constant": lambda x: np.ones_like(np.asarray(x, dtype=float)),
    "smooth-step": lambda x: np.tanh(np.asarray(x, dtype=float) / 0.05),
    "chirp": chirp,
}


def smoothed(model, t, u, x, spacing=0.005, half_width=200.0, convention="default"):
    """P_t u(x) = int u(x + y) p_t^1(y) dy by a discrete convolution on a uniform grid.

    Returns (x grid, P_t u on it, p_t^1 on [-half_width, half_width]).
    """
    model = as_model(model)
    m = int(round(half_width / spacing))
    half = spacing * np.arange(m + 1)
    ph = np.empty_like(half)
    for i in range(0, len(half), 4096):
        ph[i:i + 4096] = density_mixture(model, 1, t, half[i:i + 4096], convention)
    p = np.concatenate((ph[:0:-1], ph))  # symmetric in y
    x = np.asarray(x, dtype=float)
    n_x = int(round((x[-1] - x[0]) / spacing))
    z = x[0] + spacing * np.arange(-m, n_x + m + 1)
    uz = np.asarray(u(z), dtype=float)
    conv = fftconvolve(uz, p[::-1], mode="valid") * spacing
    grid = x[0] + spacing * np.arange(n_x + 1)
    return grid, conv, p


def gradient_bound_check(model, t, test_functions=None, x_range=(-5.0, 5.0), spacing=0.005,
                         half_width=200.0, slack=1e-6, convention="default", seed=None):
    """max |d/dx P_t u| <= 4 sup|u| sup p_t^1 + slack on ``x_range``, one report per test function.

    The derivative is a 4th-order central difference of the convolution; sup
    p_t^1 is the value at the origin (the profile is radially nonincreasing).
    """
    model = as_model(model)
    if not hartman_wintner(model.spec).holds:
        raise PreconditionError("gradient bound needs the Hartman-Wintner condition (bounded p_t)")
    test_functions = DEFAULT_TEST_FUNCTIONS if test_functions is None else test_functions
    p_sup = float(density_mixture(model, 1, t, 0.0, convention))
    x = np.array(x_range, dtype=float)
    reports = []
    for name, u in test_functions.items():
        grid, pu, _ = smoothed(model, t, u, x, spacing, half_width, convention)
        d = (pu[:-4] - 8 * pu[1:-3] + 8 * pu[3:-1] - pu[4:]) / (12 * spacing)
        zz = grid[2:-2]
        u_sup = float(np.max(np.abs(u(np.linspace(x[0] - half_width, x[1] + half_width, 400_001)))))
        bound = 4 * u_sup * p_sup
        obs = float(np.max(np.abs(d)))
        reports.append(SimulationReport(
            model=model.name, k=1, t=t, n=len(zz), seed=seed, statistic=f"gradient-bound[{name}]",
            observed=obs, predicted=bound, tolerance=slack, passed=obs <= bound + slack,
            details={"ratio_to_bound": obs / bound if bound > 0 else 0.0, "sup_u": u_sup, "sup_p": p_sup,
                     "argmax_x": float(zz[int(np.argmax(np.abs(d)))])}))
    return reports


# ---------------------------------------------------------------------------
# negative moments

def neg_moment_mc(model, kappa, t, n=100_000, seed=0, threads=1, top_share=0.2):
    """Monte-Carlo E S_t^{-kappa} with a heavy-tail diagnostic.

    The estimate is declared unstable when the largest sample carries more
    than ``top_share`` of the sum.  A stable estimate must lie within 3
    standard errors of the quadrature value; an infinite quadrature value
    must come with an unstable estimate.
    """
    model = as_model(model)
    if math.isfinite(atom_rate(model)):
        raise DomainError("neg_moment_mc needs S_t > 0 almost surely (infinite atom rate)")
    s = sample_subordinator(model, t, n, seed, threads)
    with np.errstate(divide="ignore", over="ignore"):
        v = s ** (-kappa)
    total = math.fsum(v)
    mean = total / n
    share = float(v.max() / total) if total > 0 and math.isfinite(total) else 1.0
    unstable = share > top_share or not math.isfinite(total)
    se = float(v.std(ddof=1) / math.sqrt(n)) if n > 1 and math.isfinite(total) else math.inf
    exact = neg_moment(model, kappa, t).value
    if math.isfinite(exact):
        tol = max(3 * se, 1e-12 * abs(exact))
        passed = (not unstable) and abs(mean - exact) <= tol
    else:
        tol = math.inf
        passed = unstable
    return _report(model, 0, t, n, seed, f"neg-moment(kappa={kappa})", mean, exact, tol, passed,
                   unstable=bool(unstable), top_share=share, standard_error=se)

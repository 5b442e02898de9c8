"""Command-line entry point: ``radlevy eval|verify|simulate``.

Reports are written as JSON lines on stdout (and to ``--out DIR`` when
given); curves are CSV.  Exit status is 0 iff every emitted report passed,
1 when some check failed and 2 for rejected configurations or violated
preconditions.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import __version__
from .bernstein import (
    BernsteinSpec,
    ExponentialCP,
    catalog,
    check_bernstein_signs,
    check_cm,
    cm_of_exponent,
    eval_f,
    hartman_wintner,
)
from .generator import PolynomialBump, intertwine_check
from .numerics import ConfigurationError, DomainError, NumericFailure, QuadratureConfig
from .reports import VerificationReport
from .simulation import (
    atom_check,
    empirical_density_check,
    gradient_bound_check,
    jump_count_check,
    laplace_check,
    sample_subordinator,
    samples_to_csv,
)
from .subordinator import SubordinatorModel, UnsupportedDensity, density as subordinator_density, neg_moment
from .transition import (
    CONVENTIONS,
    PreconditionError,
    density_fourier,
    density_mixture,
    dimwalk_check,
    levy_density,
    levy_dimwalk_check,
    levy_profile,
    transition_density,
    vague_limit_check,
)

FIXTURES = {"synthetic-nonbernstein": lambda u: u * u}
SUITES = ("cm", "hw", "dimwalk", "intertwine", "gradient", "vague-limit", "all")
WHATS = ("f", "density", "levy", "subordinator")


@dataclass
class RunConfig:
    command: str = "eval"
    model: str = "all"
    k: int = 1
    t: float = 1.0
    r_max: float = 8.0
    grid_n: int = 81
    route: str = "mixture"
    convention: str = "default"
    suite: str = "all"
    what: str = "density"
    u: list = field(default_factory=list)
    n: int = 100_000
    seed: int = 0
    threads: int = 1
    out: str | None = None
    svg: bool = False
    samples: bool = False
    intensity: float | None = None
    rel_tol: float = 1e-10
    abs_tol: float = 1e-14

    def validate(self):
        def bad(name, msg):
            raise ConfigurationError(f"invalid config field '{name}': {msg}")
        if self.command not in ("eval", "verify", "simulate"):
            bad("command", self.command)
        if int(self.k) != self.k or self.k < 1:
            bad("k", "dimension must be a positive integer")
        if not self.t > 0:
            bad("t", "time must be positive")
        if not self.r_max > 0:
            bad("r_max", "must be positive")
        if int(self.grid_n) != self.grid_n or self.grid_n < 2:
            bad("grid_n", "need at least two grid points")
        if self.route not in ("mixture", "fourier"):
            bad("route", "choose mixture or fourier")
        if self.convention not in CONVENTIONS:
            bad("convention", f"choose from {sorted(CONVENTIONS)}")
        if self.suite not in SUITES:
            bad("suite", f"choose from {SUITES}")
        if self.what not in WHATS:
            bad("what", f"choose from {WHATS}")
        if int(self.n) != self.n or self.n < 1:
            bad("n", "sample count must be a positive integer")
        if int(self.seed) != self.seed or self.seed < 0:
            bad("seed", "must be a nonnegative integer")
        if int(self.threads) != self.threads or self.threads < 1:
            bad("threads", "must be a positive integer")
        if self.intensity is not None and not self.intensity > 0:
            bad("lambda", "intensity must be positive")
        if any(not (isinstance(x, (int, float)) and x >= 0) for x in self.u):
            bad("u", "values must be nonnegative numbers")
        try:
            QuadratureConfig(self.rel_tol, self.abs_tol)
        except ValueError as exc:
            bad("rel_tol/abs_tol", str(exc))
        if self.model != "all" and self.model not in catalog() and self.model not in FIXTURES \
                and not os.path.isfile(self.model):
            bad("model", f"unknown model {self.model!r}; use a catalog name or a JSON file")
        return self

    @property
    def quad(self):
        return QuadratureConfig(self.rel_tol, self.abs_tol)


def _parse_floats(text):
    return [float(x) for x in str(text).split(",") if x.strip()]


def build_parser():
    p = argparse.ArgumentParser(prog="radlevy", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name, helptext in (("eval", "tabulate f, p_t^k, m_k or the subordinator density"),
                           ("verify", "run verification suites"),
                           ("simulate", "Monte-Carlo checks")):
        s = sub.add_parser(name, help=helptext)
        s.add_argument("--model", help="catalog name, fixture name or path to a BernsteinSpec JSON file")
        s.add_argument("--k", type=int)
        s.add_argument("--t", type=float)
        s.add_argument("--r-max", dest="r_max", type=float)
        s.add_argument("--grid-n", dest="grid_n", type=int)
        s.add_argument("--route", choices=("mixture", "fourier"))
        s.add_argument("--convention", choices=sorted(CONVENTIONS))
        s.add_argument("--suite", choices=SUITES)
        s.add_argument("--what", choices=WHATS)
        s.add_argument("--u", type=_parse_floats, help="comma-separated arguments for --what f")
        s.add_argument("--n", type=int)
        s.add_argument("--seed", type=int)
        s.add_argument("--threads", type=int)
        s.add_argument("--out", help="output directory")
        s.add_argument("--config", help="JSON file with RunConfig fields; flags override it")
        s.add_argument("--lambda", dest="intensity", type=float, help="intensity of the cp model")
        s.add_argument("--rel-tol", dest="rel_tol", type=float)
        s.add_argument("--abs-tol", dest="abs_tol", type=float)
        s.add_argument("--svg", action="store_true", default=None, help="also write an SVG line chart")
        s.add_argument("--samples", action="store_true", default=None, help="write subordinator samples CSV")
    return p


def config_from_args(argv=None):
    args = build_parser().parse_args(argv)
    data = {}
    if args.config:
        with open(args.config) as fh:
            data.update(json.load(fh))
    for key, value in vars(args).items():
        if key != "config" and value is not None:
            data[key] = value
    known = {f.name for f in fields(RunConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigurationError(f"invalid config field '{unknown[0]}': unknown field")
    return RunConfig(**data).validate()


# ---------------------------------------------------------------------------
# model resolution

def resolve_models(cfg: RunConfig):
    """List of (name, BernsteinSpec or fixture callable)."""
    cat = catalog()
    if cfg.intensity is not None:
        cat["cp"] = BernsteinSpec(0.0, ExponentialCP(cfg.intensity, cat["cp"].levy_measure.jump_rate), "cp")
    if cfg.model == "all":
        return list(cat.items())
    if cfg.model in cat:
        return [(cfg.model, cat[cfg.model])]
    if cfg.model in FIXTURES:
        return [(cfg.model, FIXTURES[cfg.model])]
    with open(cfg.model) as fh:
        spec = BernsteinSpec.from_json(fh.read())
    return [(spec.name or os.path.splitext(os.path.basename(cfg.model))[0], spec)]


def _single_spec(cfg):
    models = resolve_models(cfg)
    if len(models) != 1:
        raise ConfigurationError("invalid config field 'model': this command needs a single model")
    name, spec = models[0]
    if not isinstance(spec, BernsteinSpec):
        raise ConfigurationError(f"invalid config field 'model': {name} is a test fixture, not a Bernstein function")
    return name, spec


# ---------------------------------------------------------------------------
# output

def write_svg(path, x, y, title="", xlabel="r", ylabel="value", width=640, height=400):
    """Minimal dependency-free SVG line chart."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    ok = np.isfinite(x) & np.isfinite(y)
    x, y = x[ok], y[ok]
    pad = 50
    x0, x1 = (float(x.min()), float(x.max())) if len(x) else (0.0, 1.0)
    y0, y1 = (float(y.min()), float(y.max())) if len(y) else (0.0, 1.0)
    x1 = x1 if x1 > x0 else x0 + 1
    y1 = y1 if y1 > y0 else y0 + 1
    px = pad + (x - x0) / (x1 - x0) * (width - 2 * pad)
    py = height - pad - (y - y0) / (y1 - y0) * (height - 2 * pad)
    pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px, py))
    svg = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">\n'
           f'<rect width="100%" height="100%" fill="white"/>\n'
           f'<text x="{width / 2}" y="20" text-anchor="middle" font-size="14">{title}</text>\n'
           f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>\n'
           f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>\n'
           f'<text x="{width / 2}" y="{height - 10}" text-anchor="middle" font-size="12">{xlabel}</text>\n'
           f'<text x="12" y="{height / 2}" font-size="12" transform="rotate(-90 12 {height / 2})">{ylabel}</text>\n'
           f'<text x="{pad}" y="{height - pad + 15}" font-size="10">{x0:.3g}</text>\n'
           f'<text x="{width - pad}" y="{height - pad + 15}" font-size="10" text-anchor="end">{x1:.3g}</text>\n'
           f'<text x="{pad - 5}" y="{height - pad}" font-size="10" text-anchor="end">{y0:.3g}</text>\n'
           f'<text x="{pad - 5}" y="{pad}" font-size="10" text-anchor="end">{y1:.3g}</text>\n'
           f'<polyline fill="none" stroke="steelblue" stroke-width="1.5" points="{pts}"/>\n'
           f'</svg>\n')
    with open(path, "w") as fh:
        fh.write(svg)
    return path


class Output:
    """Collects the files of one run; timestamps go to the metadata sidecar only."""

    def __init__(self, cfg: RunConfig, argv):
        self.cfg = cfg
        self.argv = list(argv) if argv is not None else sys.argv[1:]
        self.dir = cfg.out
        if self.dir:
            os.makedirs(self.dir, exist_ok=True)

    def path(self, name):
        return os.path.join(self.dir, name) if self.dir else None

    def write(self, name, text):
        if self.dir:
            with open(self.path(name), "w", newline="") as fh:
                fh.write(text)

    def finish(self, status):
        if not self.dir:
            return
        meta = {"tool": "radlevy", "version": __version__, "argv": self.argv,
                "config": asdict(self.cfg), "exit_status": status,
                "created": _dt.datetime.now(_dt.timezone.utc).isoformat()}
        with open(self.path("metadata.json"), "w") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True, default=str)
            fh.write("\n")


def _csv(header, columns):
    lines = [",".join(header)]
    for row in zip(*columns):
        lines.append(",".join(repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# commands

def cmd_eval(cfg: RunConfig, out: Output, stdout=sys.stdout):
    name, spec = _single_spec(cfg)
    if cfg.what == "f":
        us = cfg.u or list(np.linspace(0.0, cfg.r_max, cfg.grid_n))
        vals = [float(eval_f(spec, u, cfg.quad)) for u in us]
        text = _csv(["u", "f"], [us, vals])
        stdout.write(text)
        out.write("f.csv", text)
        if cfg.svg and out.dir:
            write_svg(out.path("f.svg"), us, vals, f"f for {name}", "u", "f(u)")
        return 0
    header = {"model": name, "k": cfg.k, "t": cfg.t, "convention": cfg.convention, "what": cfg.what}
    if cfg.what == "density":
        r = np.linspace(0.0, cfg.r_max, cfg.grid_n)
        model = SubordinatorModel(spec)
        if cfg.route == "fourier":
            vals = density_fourier(spec, cfg.k, cfg.t, r, cfg.convention, cfg.quad)
        else:
            vals = density_mixture(model, cfg.k, cfg.t, r, cfg.convention)
        td = transition_density(model, cfg.k, cfg.t, "mixture", cfg.convention)
        header.update({"atom_weight": td.atom_weight, "route": cfg.route})
        cols = ["r", "value"]
    elif cfg.what == "levy":
        r = np.linspace(cfg.r_max / cfg.grid_n, cfg.r_max, cfg.grid_n)
        vals = levy_density(spec, cfg.k, r, cfg.convention)
        cols = ["r", "value"]
    else:
        r = np.linspace(cfg.r_max / cfg.grid_n, cfg.r_max, cfg.grid_n)
        model = SubordinatorModel(spec)
        vals = subordinator_density(model, cfg.t, r)
        header.update({"atom_weight": float(math.exp(-cfg.t * spec.levy_measure.total_mass()))
                       if spec.drift == 0 else 0.0})
        cols = ["s", "value"]
    text = "# " + json.dumps(header, sort_keys=True) + "\n" + _csv(cols, [r, vals])
    stdout.write(text)
    out.write(f"{cfg.what}.csv", text)
    if cfg.svg and out.dir:
        write_svg(out.path(f"{cfg.what}.svg"), r, vals, f"{cfg.what} {name} k={cfg.k} t={cfg.t}", cols[0])
    return 0


def _skip(identity, name, reason):
    return VerificationReport(identity, True, 0.0, 0.0, {}, {"model": name, "skipped": reason})


def _suite_cm(name, spec):
    grid = np.geomspace(1e-2, 1e2, 25)
    reps = [check_bernstein_signs(spec, grid, 5)]
    if isinstance(spec, BernsteinSpec):
        for t in (0.1, 1.0, 5.0):
            rep = check_cm(cm_of_exponent(spec, t), grid, 5)
            rep.details["t"] = t
            reps.append(rep)
    for r in reps:
        r.details["model"] = name
    return reps


def _suite_hw(name, spec):
    model = SubordinatorModel(spec)
    verdict = hartman_wintner(spec).verdict
    finite = {}
    for k in (1, 3):
        for t in (0.1, 1.0):
            finite[f"k={k},t={t}"] = math.isfinite(neg_moment(model, k / 2, t).value)
    consistent = (verdict == "holds") == all(finite.values()) and verdict != "inconclusive"
    return [VerificationReport("hartman-wintner-vs-negative-moments", consistent, 0.0, 0.0, {},
                               {"model": name, "verdict": verdict, "finite_moments": finite})]


def _suite_dimwalk(name, spec, cfg):
    model = SubordinatorModel(spec)
    reps = []
    for k in (1, 3):
        lo = transition_density(model, k, cfg.t, convention=cfg.convention)
        hi = transition_density(model, k + 2, cfg.t, convention=cfg.convention)
        reps.append(dimwalk_check(lo, hi))
    try:
        reps.append(levy_dimwalk_check(levy_profile(model, 1, cfg.convention), levy_profile(model, 3, cfg.convention)))
    except UnsupportedDensity as exc:
        reps.append(_skip("levy-dimension-walk", name, str(exc)))
    for r in reps:
        r.details.setdefault("model", name)
    return reps


def _suite_intertwine(name, spec, cfg):
    if not hartman_wintner(spec).holds:
        return [_skip("intertwining", name, "Hartman-Wintner condition fails")]
    return [intertwine_check(spec, 3, PolynomialBump(3.0, m), convention=cfg.convention) for m in (3, 4)]


def _suite_gradient(name, spec, cfg):
    if not hartman_wintner(spec).holds:
        return [_skip("gradient-bound", name, "Hartman-Wintner condition fails")]
    out = []
    for t in (0.5, 1.0):
        out.extend(gradient_bound_check(SubordinatorModel(spec), t, convention=cfg.convention))
    return out


def _suite_vague(name, spec, cfg):
    return [vague_limit_check(SubordinatorModel(spec), 1, [(1.0, 2.0), (2.0, 4.0)], cfg.convention)]


def cmd_verify(cfg: RunConfig, out: Output, stdout=sys.stdout, stderr=sys.stderr):
    suites = [s for s in SUITES if s != "all"] if cfg.suite == "all" else [cfg.suite]
    reports = []
    for name, spec in resolve_models(cfg):
        for suite in suites:
            if not isinstance(spec, BernsteinSpec) and suite != "cm":
                continue
            if suite == "cm":
                reports.extend(_suite_cm(name, spec))
            elif suite == "hw":
                reports.extend(_suite_hw(name, spec))
            elif suite == "dimwalk":
                reports.extend(_suite_dimwalk(name, spec, cfg))
            elif suite == "intertwine":
                reports.extend(_suite_intertwine(name, spec, cfg))
            elif suite == "gradient":
                reports.extend(_suite_gradient(name, spec, cfg))
            elif suite == "vague-limit":
                reports.extend(_suite_vague(name, spec, cfg))
    return _emit(reports, out, stdout, stderr)


def _emit(reports, out, stdout, stderr):
    # failing reports go last so the final line names a failure
    ordered = [r for r in reports if r.passed] + [r for r in reports if not r.passed]
    text = "".join(r.to_json() + "\n" for r in ordered)
    stdout.write(text)
    out.write("reports.jsonl", text)
    n_fail = sum(not r.passed for r in ordered)
    stderr.write(f"{len(ordered) - n_fail}/{len(ordered)} checks passed\n")
    return 0 if n_fail == 0 else 1


def cmd_simulate(cfg: RunConfig, out: Output, stdout=sys.stdout, stderr=sys.stderr):
    name, spec = _single_spec(cfg)
    model = SubordinatorModel(spec)
    reports = [atom_check(model, cfg.t, cfg.n, cfg.seed, cfg.threads)]
    reports.extend(laplace_check(model, cfg.t, cfg.n, cfg.seed, threads=cfg.threads))
    if cfg.n >= 10_000:
        try:
            reports.append(empirical_density_check(model, cfg.k, cfg.t, cfg.n, 40, cfg.seed,
                                                   cfg.convention, cfg.threads))
        except UnsupportedDensity as exc:
            stderr.write(f"density check skipped: {exc}\n")
    if isinstance(spec.levy_measure, ExponentialCP) and spec.drift == 0:
        reports.extend(jump_count_check(model, cfg.k, cfg.t, [(0.0, math.inf)], cfg.n, cfg.seed,
                                        cfg.convention, cfg.threads))
    if cfg.samples and out.dir:
        s = sample_subordinator(model, cfg.t, cfg.n, cfg.seed, cfg.threads)
        out.write("samples.csv", samples_to_csv(cfg.t, s))
    return _emit(reports, out, stdout, stderr)


def main(argv=None, stdout=None, stderr=None):
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        cfg = config_from_args(argv)
    except (ConfigurationError, ValueError, OSError, json.JSONDecodeError) as exc:
        stderr.write(f"radlevy: configuration rejected: {exc}\n")
        return 2
    out = Output(cfg, argv)
    status = 2
    try:
        if cfg.command == "eval":
            status = cmd_eval(cfg, out, stdout)
        elif cfg.command == "verify":
            status = cmd_verify(cfg, out, stdout, stderr)
        else:
            status = cmd_simulate(cfg, out, stdout, stderr)
    except PreconditionError as exc:
        stderr.write(f"radlevy: precondition violated: {exc}\n")
        status = 2
    except (ConfigurationError, DomainError, UnsupportedDensity, NumericFailure) as exc:
        stderr.write(f"radlevy: {type(exc).__name__}: {exc}\n")
        status = 2
    finally:
        out.finish(status)
    return status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

"""Command-line entry point: ``histborrow <subcommand> [flags] --out DIR``.

Every run writes its outputs plus ``manifest.json`` (subcommand, resolved
configuration, seed, package version, SHA-256 of each input file) into the
output directory.  Exit status is 0 on success, 2 on a usage error and 1 on
a numeric failure, in which case the error class name is printed.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .divergence import GridDensity
from .errors import BorrowError

STOCHASTIC = {"robustness", "asymptotics", "survival", "simulate"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """Argument parser whose usage errors are a single line on stderr."""

    def error(self, message):
        self.exit(2, f"{self.prog}: error: {message}\n")


def _digest(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _write(out, name, text):
    out.mkdir(parents=True, exist_ok=True)
    (out / name).write_text(text, encoding="utf-8", newline="\n")


def _read_grid(path):
    return GridDensity.from_csv(Path(path).read_text(encoding="utf-8"))


def _float_list(text):
    return [float(v) for v in text.split(",") if v.strip()]


def _alpha_grid(text):
    try:
        lo, hi, n = text.split(":")
        return np.linspace(float(lo), float(hi), int(n))
    except ValueError as exc:
        raise UsageError(f"--alpha-grid expects lo:hi:n, got {text!r}") from exc


def _threads(args):
    if getattr(args, "threads", None):
        return args.threads
    env = os.environ.get("HISTBORROW_THREADS")
    return int(env) if env else (os.cpu_count() or 1)


# ---------------------------------------------------------------- commands


def cmd_posterior(args, out):
    from .posterior import BorrowConfig, generalized_posterior_grid

    g = generalized_posterior_grid(_read_grid(args.p0), _read_grid(args.p1), BorrowConfig(args.xi, args.alpha))
    _write(out, "posterior.csv", g.to_csv())
    return [args.p0, args.p1]


def cmd_geodesic(args, out):
    from .posterior import alpha_geodesic

    p, q = _read_grid(args.p), _read_grid(args.q)
    if args.t_steps < 1:
        raise UsageError("--t-steps must be >= 1")
    for i in range(args.t_steps + 1):
        t = i / args.t_steps
        _write(out, f"geodesic_{i:03d}.csv", alpha_geodesic(p, q, t, args.alpha).to_csv())
    return [args.p, args.q]


def cmd_examples(args, out):
    from . import models as m
    from .posterior import BorrowConfig

    cfg = BorrowConfig(args.xi, args.alpha)
    if args.model == "gaussian":
        model = m.GaussianBorrowModel(args.sigma2, args.mu0, args.tau02, args.n, args.xbar * args.n,
                                      args.xbar**2 * args.n, args.n0, args.ybar * args.n0, args.ybar**2 * args.n0)
        _write(out, "density.csv", m.gaussian_posterior_grid(model, cfg).to_csv())
    elif args.model == "beta":
        model = m.BetaBernoulliBorrowModel(args.alpha0, args.beta0, args.n, round(args.xbar * args.n),
                                           args.n0, round(args.ybar * args.n0))
        _write(out, "density.csv", m.beta_posterior_grid(model, cfg).to_csv())
    else:
        x = _float_list(args.counts_x)
        y = _float_list(args.counts_y) if args.counts_y else x
        a0 = _float_list(args.dirichlet_prior)
        model = m.DirichletMultinomialBorrowModel(tuple(a0), tuple(x), tuple(y))
        d = m.dirichlet_posterior_simplex(model, cfg, args.resolution)
        lines = ["t1,t2,t3,log_density"]
        lines += [f"{p[0]!r},{p[1]!r},{p[2]!r},{v!r}" for p, v in zip(d.points.tolist(), d.log_vals.tolist())]
        _write(out, "density.csv", "\n".join(lines) + "\n")
    return []


def cmd_robustness(args, out):
    from .posterior import BorrowConfig
    from .robustness import ContaminationScenario, bound_monotonicity_scan, empirical_tv_trials

    alphas = _alpha_grid(args.alpha_grid)
    sc = ContaminationScenario(args.theta0, args.theta0 + args.delta_h, args.sigma**2, args.eps, args.n,
                               args.n0, args.direction)
    lines = ["alpha,bound,empirical_mean,empirical_sd"]
    for a in alphas:
        tvs, bounds = empirical_tv_trials(sc, BorrowConfig(args.xi, a), seed=args.seed, trials=args.trials)
        sd = float(np.std(tvs, ddof=1)) if tvs.size > 1 else 0.0
        lines.append(f"{float(a)!r},{float(bounds.mean())!r},{float(tvs.mean())!r},{sd!r}")
    _write(out, "robustness.csv", "\n".join(lines) + "\n")
    if alphas.size >= 5:
        _, verdict = bound_monotonicity_scan(sc, alphas, args.xi, seed=args.seed)
        _write(out, "verdict.json", json.dumps({"verdict": verdict}) + "\n")
    return []


def _shape_density(spec):
    from .shape import parse_density_spec

    if Path(spec).is_file():
        return _read_grid(spec), spec
    return parse_density_spec(spec), None


def cmd_shape(args, out):
    from .shape import default_support, grid_from_dist, mode_scan

    d0, f0 = _shape_density(args.p0)
    d1, f1 = _shape_density(args.p1)
    if isinstance(d0, GridDensity) or isinstance(d1, GridDensity):
        xs = (d0 if isinstance(d0, GridDensity) else d1).xs
    else:
        xs = default_support([d0, d1])
    p0 = d0 if isinstance(d0, GridDensity) else grid_from_dist(d0, xs)
    p1 = d1 if isinstance(d1, GridDensity) else grid_from_dist(d1, xs)
    reports = mode_scan(p0, p1, args.xi, _alpha_grid(args.alpha_grid), args.rel_tol, args.include_boundary)
    lines = ["alpha,mode_count,mode_locations"]
    for r in reports:
        locs = json.dumps([round(v, 12) for v in r.mode_locations])
        lines.append(f'{r.alpha!r},{r.mode_count},"{locs}"')
    _write(out, "shape.csv", "\n".join(lines) + "\n")
    return [f for f in (f0, f1) if f]


def cmd_asymptotics(args, out):
    from .asymptotics import consistency_sweep
    from .posterior import BorrowConfig

    sizes = [int(v) for v in _float_list(args.sizes)]
    res = consistency_sweep(args.family, args.theta0, BorrowConfig(args.xi, args.alpha), args.eps, sizes,
                            args.replicates, args.seed)
    lines = ["n,outside_mass_mean,outside_mass_sd"]
    lines += [f"{int(n)},{float(m)!r},{float(s)!r}" for n, m, s in
              zip(res.sample_sizes, res.outside_mass, res.outside_mass_sd)]
    _write(out, "asymptotics.csv", "\n".join(lines) + "\n")
    return []


def _trial_config(d, control_only):
    from .survival import TrialConfig

    return TrialConfig(int(d["n"]), tuple(d["cure_probs"]), tuple(tuple(w) for w in d["weibull"]),
                       float(d["censor_rate"]), float(d.get("horizon", 15.0)), control_only, int(d["seed"]))


def cmd_survival(args, out):
    from .survival import MCMCConfig, PriorSpec, fit, read_records_csv, survival_curves, survival_curves_csv
    from .survival import SYNTHETIC_CURRENT, SYNTHETIC_HIST, synthesize_trial

    cfg = json.loads(Path(args.config).read_text(encoding="utf-8")) if args.config else {}
    inputs = [args.config] if args.config else []
    priors = PriorSpec(**cfg.get("priors", {}))
    mc = cfg.get("mcmc", {})
    base = MCMCConfig.fast() if args.fast else MCMCConfig()
    mcmc = MCMCConfig(int(mc.get("chains", base.chains)), int(mc.get("iterations", base.iterations)),
                      int(mc.get("burnin", base.burnin)), args.seed)
    if args.fast:
        mcmc = MCMCConfig(base.chains, base.iterations, base.burnin, args.seed)
    if args.current:
        current = read_records_csv(Path(args.current).read_text(encoding="utf-8"))
        inputs.append(args.current)
    else:
        data = cfg.get("data", {})
        current = synthesize_trial(_trial_config(data["current"], False) if "current" in data
                                   else SYNTHETIC_CURRENT)
    if args.hist:
        hist = read_records_csv(Path(args.hist).read_text(encoding="utf-8"))
        inputs.append(args.hist)
    else:
        data = cfg.get("data", {})
        hist = synthesize_trial(_trial_config(data["hist"], True) if "hist" in data else SYNTHETIC_HIST)
    res = fit(current, hist, priors, mcmc, t0=cfg.get("t0"), hist_scale=cfg.get("hist_scale", "profile"),
              shared_control=cfg.get("shared_control", True), workers=_threads(args))
    _write(out, "summary.json", res.summary_json() + "\n")
    tmax = max(r.time for r in current)
    times = np.linspace(0.0, tmax, 201)[1:]
    _write(out, "survival_curves.csv", survival_curves_csv(survival_curves(res.target, res.chains, times), times))
    return inputs


def cmd_km(args, out):
    from .survival import km_estimate, read_records_csv

    recs = read_records_csv(Path(args.data).read_text(encoding="utf-8"))
    groups = sorted({r.group for r in recs}) if args.by_group else [None]
    parts = []
    for g in groups:
        sub = [r for r in recs if g is None or r.group == g]
        body = km_estimate(sub).to_csv().splitlines()
        if not parts:
            parts.append("group," + body[0])
        parts += [f"{'all' if g is None else g},{line}" for line in body[1:]]
    _write(out, "km.csv", "\n".join(parts) + "\n")
    return [args.data]


def cmd_simulate(args, out):
    from .survival import TrialConfig, synthesize_trial, write_records_csv

    w = [tuple(_float_list(part)) for part in args.weibull.split(";")]
    if len(w) == 1:
        w = w * 2
    cp = _float_list(args.cure_probs)
    if len(cp) == 1:
        cp = cp * 2
    cfg = TrialConfig(args.n, tuple(cp), tuple(w), args.censor_rate, args.horizon, args.control_only, args.seed)
    _write(out, "trial.csv", write_records_csv(synthesize_trial(cfg)))
    return []


# ------------------------------------------------------------------ parser


def build_parser():
    p = _Parser(prog="histborrow", description="Generalized power posteriors for "
                                "borrowing from historical data.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, seed=False):
        sp.add_argument("--out", required=True, help="output directory (created if missing)")
        sp.add_argument("--threads", type=int, default=None,
                        help="worker processes (count); falls back to HISTBORROW_THREADS, then CPU count")
        if seed:
            sp.add_argument("--seed", type=int, required=True, help="RNG seed (integer, required)")

    sp = sub.add_parser("posterior", help="generalized power posterior of two grid densities")
    sp.add_argument("--p0", required=True, help="CSV grid 'x,log_density' for L*pi0 (log scale)")
    sp.add_argument("--p1", required=True, help="CSV grid 'x,log_density' for L*L0*pi0 (log scale)")
    sp.add_argument("--xi", type=float, required=True, help="borrowing weight in [0, 1] (unitless)")
    sp.add_argument("--alpha", type=float, required=True, help="divergence parameter, >= -1 (unitless)")
    common(sp)
    sp.set_defaults(func=cmd_posterior)

    sp = sub.add_parser("geodesic", help="points along the dual alpha-geodesic between two grids")
    sp.add_argument("--p", required=True, help="CSV grid of the start density")
    sp.add_argument("--q", required=True, help="CSV grid of the end density")
    sp.add_argument("--alpha", type=float, required=True, help="divergence parameter, >= -1 (unitless)")
    sp.add_argument("--t-steps", type=int, default=10, help="number of steps k; writes k+1 grids (count)")
    common(sp)
    sp.set_defaults(func=cmd_geodesic)

    sp = sub.add_parser("examples", help="closed-form conjugate examples")
    sp.add_argument("--model", choices=["gaussian", "beta", "dirichlet"], required=True,
                    help="conjugate family: normal mean, Bernoulli rate or 3-category probabilities")
    sp.add_argument("--alpha", type=float, required=True, help="divergence parameter, > -1 (unitless)")
    sp.add_argument("--xi", type=float, required=True, help="borrowing weight in [0, 1] (unitless)")
    sp.add_argument("--n", type=int, default=10, help="current sample size (count)")
    sp.add_argument("--n0", type=int, default=10, help="historical sample size (count)")
    sp.add_argument("--xbar", type=float, default=None, help="current sample mean (data units)")
    sp.add_argument("--ybar", type=float, default=None, help="historical sample mean (data units)")
    sp.add_argument("--sigma2", type=float, default=1.0, help="known data variance (data units squared)")
    sp.add_argument("--mu0", type=float, default=1.0, help="prior mean (data units)")
    sp.add_argument("--tau02", type=float, default=1.0, help="prior variance (data units squared)")
    sp.add_argument("--alpha0", type=float, default=2.0, help="Beta prior first shape (unitless)")
    sp.add_argument("--beta0", type=float, default=8.0, help="Beta prior second shape (unitless)")
    sp.add_argument("--counts-x", default="20,15,15", help="current category counts, comma separated")
    sp.add_argument("--counts-y", default=None, help="historical category counts (default: same as current)")
    sp.add_argument("--dirichlet-prior", default="2,2,2", help="Dirichlet prior concentrations")
    sp.add_argument("--resolution", type=int, default=200, help="simplex subdivisions per edge (count)")
    common(sp)
    sp.set_defaults(func=cmd_examples)

    sp = sub.add_parser("robustness", help="TV bound and empirical TV under Huber contamination")
    sp.add_argument("--eps", type=float, default=0.05, help="contamination proportion in [0, 0.5]")
    sp.add_argument("--delta-h", type=float, default=1.25, help="outlier shift thetaH - theta0 (data units)")
    sp.add_argument("--theta0", type=float, default=0.0, help="true mean (data units)")
    sp.add_argument("--sigma", type=float, default=1.0, help="data standard deviation (data units)")
    sp.add_argument("--n", type=int, default=50, help="current sample size (count)")
    sp.add_argument("--n0", type=int, default=50, help="historical sample size (count)")
    sp.add_argument("--xi", type=float, default=0.5, help="borrowing weight in [0, 1]")
    sp.add_argument("--alpha-grid", default="-0.5:3:8", help="alpha values as lo:hi:n (write --alpha-grid=LO:HI:N when LO is negative)")
    sp.add_argument("--direction", choices=["current", "historical"], default="current",
                    help="which sample is contaminated")
    sp.add_argument("--trials", type=int, default=10, help="simulated data sets per alpha (count)")
    common(sp, seed=True)
    sp.set_defaults(func=cmd_robustness)

    sp = sub.add_parser("shape", help="mode counts of the generalized posterior along alpha")
    sp.add_argument("--p0", required=True, help="normal:mu,sigma | beta:a,b | loggamma:c | grid CSV path")
    sp.add_argument("--p1", required=True, help="normal:mu,sigma | beta:a,b | loggamma:c | grid CSV path")
    sp.add_argument("--xi", type=float, default=0.5, help="borrowing weight in (0, 1)")
    sp.add_argument("--alpha-grid", default="-0.9:5:60", help="alpha values as lo:hi:n (write --alpha-grid=LO:HI:N when LO is negative)")
    sp.add_argument("--rel-tol", type=float, default=1e-4, help="relative log-prominence threshold")
    sp.add_argument("--include-boundary", action="store_true", help="count endpoint maxima as modes")
    common(sp)
    sp.set_defaults(func=cmd_shape)

    sp = sub.add_parser("asymptotics", help="posterior consistency sweep")
    sp.add_argument("--family", choices=["gaussian", "beta"], default="gaussian",
                    help="data model: unit-variance normal or Bernoulli with a Beta prior")
    sp.add_argument("--theta0", type=float, default=None, help="true parameter (default 0 or 0.3)")
    sp.add_argument("--eps", type=float, default=0.2, help="ball radius (parameter units)")
    sp.add_argument("--sizes", default="20,80,320,1280", help="sample sizes n = n0 (counts)")
    sp.add_argument("--replicates", type=int, default=20, help="replicates per size (count)")
    sp.add_argument("--alpha", type=float, default=0.5, help="divergence parameter (unitless)")
    sp.add_argument("--xi", type=float, default=0.5, help="borrowing weight in [0, 1]")
    common(sp, seed=True)
    sp.set_defaults(func=cmd_asymptotics)

    sp = sub.add_parser("survival", help="cure-rate survival model with borrowing")
    ssub = sp.add_subparsers(dest="action", required=True)
    fp = ssub.add_parser("fit", help="fit by MCMC and write a summary")
    fp.add_argument("--config", default=None, help="JSON with priors, mcmc, data, t0, hist_scale, shared_control")
    fp.add_argument("--current", default=None, help="CSV time,event,group (default: synthetic trial)")
    fp.add_argument("--hist", default=None, help="CSV time,event,group with group 0 (default: synthetic)")
    fp.add_argument("--fast", action="store_true", help="4 chains x 8000 iterations, 2000 burn-in")
    common(fp, seed=True)
    fp.set_defaults(func=cmd_survival)

    sp = sub.add_parser("km", help="Kaplan-Meier estimate with Greenwood band")
    sp.add_argument("--data", required=True, help="CSV time,event,group")
    sp.add_argument("--by-group", action="store_true", help="one curve per treatment group")
    common(sp)
    sp.set_defaults(func=cmd_km)

    sp = sub.add_parser("simulate", help="synthetic cure-rate trial")
    sp.add_argument("--n", type=int, required=True, help="subjects (count)")
    sp.add_argument("--cure-probs", default="0.3,0.5", help="cure probability per arm (control,treatment)")
    sp.add_argument("--weibull", default="1.2,2.0", help="shape,scale per arm, arms separated by ';' (time units)")
    sp.add_argument("--censor-rate", type=float, default=0.05, help="exponential censoring rate (1/time)")
    sp.add_argument("--horizon", type=float, default=15.0, help="administrative censoring time (time units)")
    sp.add_argument("--control-only", action="store_true", help="all subjects in group 0")
    common(sp, seed=True)
    sp.set_defaults(func=cmd_simulate)
    return p


def _resolve(args):
    if args.command == "examples":
        if args.xbar is None:
            args.xbar = 1.0 if args.model == "gaussian" else 0.6
        if args.ybar is None:
            args.ybar = 2.0 if args.model == "gaussian" else 0.7
    if args.command == "asymptotics" and args.theta0 is None:
        args.theta0 = 0.0 if args.family == "gaussian" else 0.3


def replay(manifest_path, out):
    """Re-run the command recorded in a manifest, writing to ``out``."""
    argv = list(json.loads(Path(manifest_path).read_text(encoding="utf-8"))["argv"])
    i = argv.index("--out")
    argv[i + 1] = str(out)
    return main(argv)


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    _resolve(args)
    out = Path(args.out)
    try:
        inputs = args.func(args, out)
    except UsageError as exc:
        print(f"histborrow: error: {exc}", file=sys.stderr)
        return 2
    except BorrowError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except (ValueError, FileNotFoundError) as exc:
        print(f"histborrow: error: {exc}", file=sys.stderr)
        return 2
    config = {k: v for k, v in vars(args).items() if k not in ("func", "out", "threads")}
    manifest = {
        "subcommand": args.command if args.command != "survival" else f"survival {args.action}",
        "config": config,
        "seed": getattr(args, "seed", None),
        "version": __version__,
        "inputs": {str(p): _digest(p) for p in inputs},
        "argv": list(argv) if argv is not None else sys.argv[1:],
    }
    _write(out, "manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Five subcommands: ``nominal`` (density solver), ``outage-sweep`` (simulated
vs approximated outage over a SIR-target grid), ``optimize`` (closed-form
throughput optimum), ``throughput-sweep`` (optimum versus primary density),
and ``validate`` (cross-module invariant suite).

Configuration comes from an optional ``key = value`` file (--config) with any
key overridable on the command line (--lambda_p 0.02 ...). The primary
artifact (CSV table or report) goes to --out, or to standard output when
--out is absent; commands that produce both a report and a CSV send the
report to stderr in that case so stdout stays machine-readable.

Exit codes: 0 success, 1 runtime or validation failure, 2 usage/config error.
The CLI is single-threaded control flow; --workers only sizes the thread
pools inside the library estimators, which aggregate deterministically.
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from .analytic import (
    ccdf_curve,
    derive,
    guard_prob,
    levy_nominal_alpha4,
    nominal_density,
    secondary_ccdf_target,
    solve_nominal_densities,
)
from .config import _ALIASES, _EXPERIMENT_KEYS, ConfigError, parse_config
from .optimize import MuSolverSettings, solve_p1, throughput_sweep
from .rng import RngStream
from .simulate import primary_outage_curve, secondary_outage_curve
from .validate import render_report, run_validation

__all__ = ["main"]

OUTAGE_HEADER = ("theta,pout_p_sim,pout_p_sim_ci,pout_p_approx,"
                 "pout_s_sim,pout_s_sim_ci,pout_s_approx")
OPTIMIZE_HEADER = "case,p_s_star_ratio,lambda_s_star,c_s_star,mu_p,mu_s,p_t"
THROUGHPUT_HEADER = ("lambda_p,p_t,mu_p,mu_s,case,p_s_star_ratio,"
                     "lambda_s_star,c_s_star,feasible_flag")


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return "%d" % v
    return format(float(v), ".17g")


def _csv(header: str, rows) -> str:
    lines = [header]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _report(text: str, out: str | None) -> None:
    # report accompanies a CSV: keep stdout clean when the CSV goes there
    (sys.stdout if out is not None else sys.stderr).write(text)


def _parse_theta_list(raw: str) -> list[float]:
    try:
        thetas = [float(tok) for tok in raw.split(",") if tok.strip()]
    except ValueError:
        raise ConfigError(f"--theta_list: {raw!r} is not a comma-separated "
                          "list of numbers") from None
    if not thetas or any(t <= 0.0 for t in thetas):
        raise ConfigError("--theta_list: SIR targets must be positive")
    return thetas


def cmd_nominal(cfg, args) -> int:
    net = cfg.network()
    which = args.which
    target = args.target
    if target is None:
        target = net.eps_p if which == "p" else net.eps_s
    if not 0.0 < target < 1.0:
        raise ConfigError("--target must lie in (0, 1)")
    ccdf_target = target
    if which == "s":
        ccdf_target = secondary_ccdf_target(target, guard_prob(net.lambda_p, net.r_g))
    mu = nominal_density(ccdf_target, net.alpha, cfg.mu_trials, cfg.mu_tolerance,
                         RngStream(cfg.seed).substream(0), cfg.window_radius,
                         workers=args.workers)
    lines = [
        f"which = {which}",
        f"target = {_fmt(target)}",
        f"ccdf_target = {_fmt(ccdf_target)}",
        f"mu = {_fmt(mu)}",
        f"trials = {cfg.mu_trials:d}",
        f"tolerance = {_fmt(cfg.mu_tolerance)}",
    ]
    if net.alpha == 4.0:
        lines.append(f"levy_mu = {_fmt(levy_nominal_alpha4(ccdf_target))}")
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_outage_sweep(cfg, args) -> int:
    if args.theta_list is not None:
        thetas = _parse_theta_list(args.theta_list)
    else:
        thetas = [float(t) for t in np.geomspace(0.1, 100.0, 20)]
    net = cfg.network()
    der = derive(net)
    rng = RngStream(cfg.seed)
    sim_p = primary_outage_curve(net, thetas, cfg.trials, rng.substream(0),
                                 cfg.window_radius, args.workers)
    sim_s = secondary_outage_curve(net, thetas, cfg.trials, rng.substream(1),
                                   cfg.window_radius, args.workers)
    # approximation columns: reduced-CCDF values at the per-theta effective
    # densities, each curve from one coupled realization set (monotone in theta)
    e = 2.0 / net.alpha
    factor_p = der.p_t * net.lambda_s * net.power_ratio ** e + net.lambda_p
    factor_s = der.p_t * net.lambda_s + net.lambda_p * net.power_ratio ** (-e)
    appr_p = ccdf_curve([t ** e * factor_p for t in thetas], net.alpha,
                        cfg.mu_trials, rng.substream(2), cfg.window_radius,
                        args.workers)
    raw_s = ccdf_curve([t ** e * factor_s for t in thetas], net.alpha,
                       cfg.mu_trials, rng.substream(3), cfg.window_radius,
                       args.workers)
    rows = []
    for th, sp, ss, ap, rs in zip(thetas, sim_p, sim_s, appr_p, raw_s):
        as_ = min(max((rs.probability - der.p_g) / (1.0 - der.p_g), 0.0), 1.0)
        rows.append((th, sp.probability, sp.ci_halfwidth, ap.probability,
                     ss.probability, ss.ci_halfwidth, as_))
    _emit(_csv(OUTAGE_HEADER, rows), args.out)
    return 0


def cmd_optimize(cfg, args) -> int:
    net = cfg.network()
    der = derive(net)
    mu = solve_nominal_densities(net, cfg.mu_trials, cfg.mu_tolerance,
                                 RngStream(cfg.seed), cfg.window_radius,
                                 args.workers)
    res = solve_p1(net, mu, der.p_t)
    report = [
        f"case = {res.case_id:d}",
        f"p_s_star_ratio = {_fmt(res.p_s_star)}",
        f"lambda_s_star = {_fmt(res.lambda_s_star)}",
        f"c_s_star = {_fmt(res.c_s_star)}",
        f"mu_p = {_fmt(res.mu_p)}",
        f"mu_s = {_fmt(res.mu_s)}",
        f"p_t = {_fmt(res.p_t)}",
        f"power_cap = {_fmt(net.power_cap())}",
        f"feasible = {'yes' if res.feasible else 'no'}",
    ]
    _report("\n".join(report) + "\n", args.out)
    row = (res.case_id, res.p_s_star, res.lambda_s_star, res.c_s_star,
           res.mu_p, res.mu_s, res.p_t)
    _emit(_csv(OPTIMIZE_HEADER, [row]), args.out)
    return 0


def cmd_throughput_sweep(cfg, args) -> int:
    if args.steps < 1:
        raise ConfigError("--steps must be >= 1")
    if args.lambda_p_min <= 0.0:
        raise ConfigError("--lambda_p_min must be positive")
    if args.steps == 1:
        lams = [args.lambda_p_min]
    else:
        if args.lambda_p_max <= args.lambda_p_min:
            raise ConfigError("--lambda_p_max must exceed --lambda_p_min")
        lams = [float(x) for x in
                np.linspace(args.lambda_p_min, args.lambda_p_max, args.steps)]
    settings = MuSolverSettings(cfg.mu_trials, cfg.mu_tolerance,
                                cfg.window_radius, workers=args.workers)
    results = throughput_sweep(cfg.network(), lams, settings, RngStream(cfg.seed))
    rows = [
        (lam, r.p_t, r.mu_p, r.mu_s, r.case_id, r.p_s_star,
         r.lambda_s_star, r.c_s_star, 1 if r.feasible else 0)
        for lam, r in zip(lams, results)
    ]
    _emit(_csv(THROUGHPUT_HEADER, rows), args.out)
    return 0


def cmd_validate(cfg, args) -> int:
    results = run_validation(cfg, args.workers)
    _emit(render_report(cfg, results), args.out)
    return 0 if all(r.passed for r in results) else 1


_COMMANDS = {
    "nominal": cmd_nominal,
    "outage-sweep": cmd_outage_sweep,
    "optimize": cmd_optimize,
    "throughput-sweep": cmd_throughput_sweep,
    "validate": cmd_validate,
}

_OVERRIDE_KEYS = tuple(_EXPERIMENT_KEYS) + tuple(_ALIASES)


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    run = common.add_argument_group("run options")
    run.add_argument("--config", metavar="PATH",
                     help="config file of 'key = value' lines ('#' comments)")
    run.add_argument("--out", metavar="PATH",
                     help="write the primary artifact here (default: stdout)")
    run.add_argument("--workers", type=int, default=1, metavar="N",
                     help="threads inside Monte Carlo estimators (default 1; "
                          "results are identical for any value)")
    ov = common.add_argument_group("config overrides (win over --config)")
    for key in _OVERRIDE_KEYS:
        ov.add_argument(f"--{key}", metavar="V", default=None)

    p = argparse.ArgumentParser(
        prog="cogharvest",
        description="Outage and throughput analysis of an energy-harvesting "
                    "secondary network sharing spectrum with a primary network.",
    )
    sub = p.add_subparsers(dest="command", required=True, metavar="command")

    q = sub.add_parser("nominal", parents=[common],
                       help="solve the interferer density whose outage hits a target")
    q.add_argument("--target", type=float, default=None,
                   help="outage target (default: eps_p or eps_s per --which)")
    q.add_argument("--which", choices=("p", "s"), default="p",
                   help="p: primary-style CCDF target; s: apply the secondary "
                        "guard-zone transform first (default p)")

    q = sub.add_parser("outage-sweep", parents=[common],
                       help="simulated vs approximated outage over a SIR-target grid")
    q.add_argument("--theta_list", metavar="T1,T2,...", default=None,
                   help="SIR targets (default: 20 log-spaced in [0.1, 100])")

    sub.add_parser("optimize", parents=[common],
                   help="closed-form secondary density/power optimum")

    q = sub.add_parser("throughput-sweep", parents=[common],
                       help="optimum versus primary density")
    q.add_argument("--lambda_p_min", type=float, default=0.001, metavar="V")
    q.add_argument("--lambda_p_max", type=float, default=0.02, metavar="V")
    q.add_argument("--steps", type=int, default=10, metavar="N")

    sub.add_parser("validate", parents=[common],
                   help="run the cross-module invariant suite")
    return p


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        overrides = {}
        for key in _OVERRIDE_KEYS:
            v = getattr(args, key)
            if v is not None:
                overrides[key] = v
        cfg = parse_config(path=args.config, overrides=overrides)
        if args.workers < 1:
            raise ConfigError("--workers must be >= 1")
        return _COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"cogharvest: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failure, not usage
        print(f"cogharvest: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

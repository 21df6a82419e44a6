"""Cross-module invariant suite behind the `validate` command.

Each check is named, produces a measured value and its bound, and never
raises: an exception becomes a failed check carrying the error text. The
rendered report opens with the canonical config echo and prefixes every
non-config line with '#', so the whole report re-parses as a config file
identical to the one validated.

All randomness derives from the config seed through fixed substream indices,
and every Monte Carlo path aggregates worker-independently, so two runs with
the same config produce byte-identical reports for any worker count. Check
sizes scale with the config's trials/slots/mu_trials fields.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .analytic import (
    NominalDensities,
    ccdf_curve,
    ccdf_unit_shotnoise,
    derive,
    levy_ccdf_alpha4,
    levy_nominal_alpha4,
    nominal_density,
    secondary_ccdf_target,
)
from .config import ExperimentConfig, NetworkConfig, format_config
from .geometry import Point2D, PointSample, Window, nearest_distance, sample_hppp, scale_points, shot_noise, superpose
from .optimize import MuSolverSettings, case1_solution, case2_solution, grid_oracle, solve_p1, throughput_sweep
from .rng import RngStream
from .simulate import (
    _draw_block,
    empirical_tx_prob,
    estimate_primary_outage,
    estimate_secondary_outage,
    primary_outage_curve,
    secondary_outage_curve,
    simulate_battery_chain,
)

__all__ = ["CheckResult", "run_validation", "render_report"]

_ORIGIN = Point2D(0.0, 0.0)
_THETA_GRID = (1.0, 2.0, 5.0, 10.0, 20.0)
_LEVY_GRID = (0.01, 0.05, 0.1, 0.2)
_ROUNDTRIP_TARGETS = (0.1, 0.2, 0.35, 0.4)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    measured: str
    bound: str


def _f(x: float) -> str:
    return format(float(x), ".9g")


def _skip(reason: str) -> tuple[bool, str, str]:
    return True, f"skipped ({reason})", "-"


# each check body returns (passed, measured, bound)

def _check_mapping(cfg: ExperimentConfig, base: RngStream, workers: int):
    net = cfg.network()
    g = base.substream(101).generator()
    win = Window(20.0)
    worst = 0.0
    for _ in range(200):
        s = sample_hppp(0.02, win, g)
        if len(s) == 0:
            continue
        a = 1.0 + 2.0 * g.random()
        v0 = shot_noise(_ORIGIN, s, net.alpha, 1.0)
        v1 = shot_noise(_ORIGIN, scale_points(s, a), net.alpha, 1.0)
        worst = max(worst, abs(v1 - a ** (-net.alpha) * v0) / v1)
    return worst <= 1e-12, _f(worst), "<= 1e-12 relative"


def _check_superposition(cfg: ExperimentConfig, base: RngStream, workers: int):
    net = cfg.network()
    g = base.substream(102).generator()
    win = Window(20.0)
    worst = 0.0
    for _ in range(200):
        s1 = sample_hppp(0.01, win, g)
        s2 = sample_hppp(0.02, win, g)
        both = superpose(s1, s2)
        if len(both) == 0:
            continue
        v1 = shot_noise(_ORIGIN, s1, net.alpha, 1.0)
        v2 = shot_noise(_ORIGIN, s2, net.alpha, 1.0)
        v = shot_noise(_ORIGIN, both, net.alpha, 1.0)
        worst = max(worst, abs(v - (v1 + v2)) / v)
    return worst <= 1e-12, _f(worst), "<= 1e-12 relative"


def _check_chain(cfg: ExperimentConfig, base: RngStream, workers: int):
    der = derive(cfg.network())
    emp, _ = simulate_battery_chain(der.p_g, der.p_h, cfg.slots, base.substream(103))
    counted = cfg.slots - min(1000, cfg.slots - 1)
    bound = 3.0 * math.sqrt(der.p_t * (1.0 - der.p_t) / counted)
    return abs(emp - der.p_t) <= bound, _f(abs(emp - der.p_t)), f"<= {_f(bound)} (3 sigma)"


def _check_positional(cfg: ExperimentConfig, base: RngStream, workers: int):
    net = cfg.network()
    der = derive(net)
    emp = empirical_tx_prob(net, cfg.slots, base.substream(104), cfg.window_radius)
    counted = cfg.slots - min(1000, cfg.slots - 1)
    bound = 3.0 * math.sqrt(der.p_t * (1.0 - der.p_t) / counted)
    return abs(emp - der.p_t) <= bound, _f(abs(emp - der.p_t)), f"<= {_f(bound)} (3 sigma)"


def _check_stable_law(cfg: ExperimentConfig, base: RngStream, workers: int):
    net = cfg.network()
    if net.alpha != 4.0:
        return _skip("alpha != 4")
    worst = 0.0
    for i, lam in enumerate(_LEVY_GRID):
        est = ccdf_unit_shotnoise(lam, 4.0, cfg.mu_trials, base.substream(105, i),
                                  cfg.window_radius, workers)
        worst = max(worst, abs(est.probability - levy_ccdf_alpha4(lam)) / est.ci_halfwidth)
    return worst <= 3.0, _f(worst), "<= 3 CI half-widths"


def _check_roundtrip(cfg: ExperimentConfig, base: RngStream, workers: int):
    # solver and re-estimate each carry one MC sigma, so the noise budget is
    # 3 sigma of their combined deviation on top of the solver tolerance
    net = cfg.network()
    worst = 0.0
    for i, t in enumerate(_ROUNDTRIP_TARGETS):
        mu = nominal_density(t, net.alpha, cfg.mu_trials, cfg.mu_tolerance,
                             base.substream(106, 2 * i), cfg.window_radius,
                             workers=workers)
        est = ccdf_unit_shotnoise(mu, net.alpha, cfg.mu_trials,
                                  base.substream(106, 2 * i + 1),
                                  cfg.window_radius, workers)
        budget = cfg.mu_tolerance + 3.0 * math.sqrt(2.0 * t * (1.0 - t) / cfg.mu_trials)
        worst = max(worst, abs(est.probability - t) / budget)
    return worst <= 1.0, _f(worst), "<= 1 (tolerance + 3 sigma combined)"


def _check_primary_agreement(cfg: ExperimentConfig, base: RngStream, workers: int):
    net = cfg.network()
    der = derive(net)
    e = 2.0 / net.alpha
    sim = primary_outage_curve(net, _THETA_GRID, cfg.trials, base.substream(107),
                               cfg.window_radius, workers)
    factor = der.p_t * net.lambda_s * net.power_ratio ** e + net.lambda_p
    taus = [th ** e * factor for th in _THETA_GRID]
    approx = ccdf_curve(taus, net.alpha, cfg.mu_trials, base.substream(207),
                        cfg.window_radius, workers)
    worst = max(abs(s.probability - a.probability) for s, a in zip(sim, approx))
    return worst <= 0.05, _f(worst), "<= 0.05 absolute"


def _check_secondary_agreement(cfg: ExperimentConfig, base: RngStream, workers: int):
    net = cfg.network()
    der = derive(net)
    e = 2.0 / net.alpha
    sim = secondary_outage_curve(net, _THETA_GRID, cfg.trials, base.substream(108),
                                 cfg.window_radius, workers)
    factor = der.p_t * net.lambda_s + net.lambda_p * net.power_ratio ** (-e)
    taus = [th ** e * factor for th in _THETA_GRID]
    raw = ccdf_curve(taus, net.alpha, cfg.mu_trials, base.substream(208),
                     cfg.window_radius, workers)
    worst = 0.0
    for s, r in zip(sim, raw):
        a = min(max((r.probability - der.p_g) / (1.0 - der.p_g), 0.0), 1.0)
        worst = max(worst, abs(s.probability - a))
    return worst <= 0.05, _f(worst), "<= 0.05 absolute"


def _check_optimizer_grid(cfg: ExperimentConfig, base: RngStream, workers: int):
    g = base.substream(109).generator()
    found = 0
    worst = 0.0
    for _ in range(4000):
        if found >= 50:
            break
        alpha = g.uniform(2.5, 5.0)
        r_h = g.uniform(0.3, 2.0)
        eta = g.uniform(0.05, 1.0)
        net = NetworkConfig(
            lambda_p=10.0 ** g.uniform(-4.0, -1.5),
            lambda_s=0.1,
            power_ratio=eta * r_h ** (-alpha),
            r_g=r_h * g.uniform(1.5, 3.0),
            r_h=r_h,
            eta=eta,
            alpha=alpha,
            theta_p=10.0 ** g.uniform(-0.3, 1.3),
            theta_s=10.0 ** g.uniform(-0.3, 1.3),
        )
        p_t = 10.0 ** g.uniform(-3.0, -0.7)
        mu_p = net.theta_p ** (2.0 / alpha) * net.lambda_p * g.uniform(1.5, 30.0)
        mu_s = 10.0 ** g.uniform(-2.0, 0.0)
        mu = NominalDensities(mu_p, mu_s, 1, 1.0)
        res = solve_p1(net, mu, p_t)
        # keep configs whose optimum retains >= 2% of the unconstrained
        # density ceiling; nearer the feasibility boundary c_s_star -> 0 and
        # relative comparison degenerates
        if not res.feasible or \
                res.pt_lambda_product < 0.02 * net.theta_s ** (-2.0 / alpha) * mu_s:
            continue
        found += 1
        oracle = grid_oracle(net, mu, p_t, 1000)
        worst = max(worst, abs(oracle.c_s_star - res.c_s_star) / res.c_s_star)
    if found < 50:
        return False, f"only {found} feasible configurations", ">= 50 required"
    return worst <= 0.01, _f(worst), "<= 0.01 relative over 50 configs"


def _check_case_boundary(cfg: ExperimentConfig, base: RngStream, workers: int):
    net = cfg.network()
    if net.alpha != 4.0:
        return _skip("alpha != 4")
    mu = NominalDensities(
        levy_nominal_alpha4(net.eps_p),
        levy_nominal_alpha4(secondary_ccdf_target(net.eps_s, derive(net).p_g)),
        1, 1.0,
    )
    ratio_x = (net.theta_s / net.theta_p) * (mu.mu_s / mu.mu_p) ** (-net.alpha / 2.0)
    eta_eq = ratio_x * net.r_h ** net.alpha
    if not 0.0 < eta_eq <= 1.0:
        return _skip("equal-threshold eta outside (0, 1]")
    net_eq = replace(net, eta=eta_eq, power_ratio=0.5 * ratio_x)
    p_t = derive(net_eq).p_t
    r1, paren1 = case1_solution(net_eq, mu, p_t)
    r2, paren2 = case2_solution(net_eq, mu, p_t)
    worst = max(abs(r1 - r2) / r2, abs(paren1 - paren2) / abs(paren2))
    return worst <= 1e-9, _f(worst), "<= 1e-9 relative"


def _check_linearity(cfg: ExperimentConfig, base: RngStream, workers: int):
    net = cfg.network()
    settings = MuSolverSettings(cfg.mu_trials, cfg.mu_tolerance, cfg.window_radius,
                                workers=workers)
    lams = np.linspace(0.002, 0.02, 10)
    res = throughput_sweep(net, lams, settings, base.substream(111))
    if not all(r.feasible for r in res):
        return False, "sweep hit an infeasible point", "all points feasible"
    ys = np.array([r.c_s_star for r in res])
    slope, intercept = np.polyfit(lams, ys, 1)
    ss_res = float(np.sum((ys - (slope * lams + intercept)) ** 2))
    ss_tot = float(np.sum((ys - ys.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot
    return (r2 >= 0.99 and slope < 0.0), f"R2={_f(r2)} slope={_f(slope)}", "R2 >= 0.99, slope < 0"


def _check_frozen_slope(cfg: ExperimentConfig, base: RngStream, workers: int):
    net = cfg.network()
    mu = NominalDensities(0.06, 0.16, 1, 1.0)
    la, lb = 0.004, 0.012
    _, pa = case1_solution(replace(net, lambda_p=la), mu, 0.03)
    _, pb = case1_solution(replace(net, lambda_p=lb), mu, 0.03)
    rate = math.log2(1.0 + net.theta_s)
    fd = (pb - pa) * rate / (lb - la)
    cf = -net.eta ** (-2.0 / net.alpha) * net.r_h ** 2 * rate
    worst = abs(fd - cf) / abs(cf)
    return worst <= 1e-9, _f(worst), "<= 1e-9 relative"


def _check_inverse_prop(cfg: ExperimentConfig, base: RngStream, workers: int):
    net = cfg.network()
    settings = MuSolverSettings(cfg.mu_trials, cfg.mu_tolerance, cfg.window_radius,
                                workers=workers)
    lams = (1e-4, 1e-3, 5e-3, 1e-2)
    res = throughput_sweep(net, lams, settings, base.substream(113))
    for lam, r in zip(lams, res):
        if not r.feasible:
            return False, f"infeasible at lambda_p={lam:g}", "all points feasible"
        mu = NominalDensities(r.mu_p, r.mu_s, 1, 1.0)
        solver = case1_solution if r.case_id == 1 else case2_solution
        _, paren = solver(replace(net, lambda_p=lam), mu, r.p_t)
        if r.pt_lambda_product != paren or r.lambda_s_star != paren / r.p_t:
            return False, "product not bit-identical to closed form", "bit-identical"
    growth = res[0].lambda_s_star / res[-1].lambda_s_star
    return growth > 10.0, _f(growth), "> 10 (density growth toward lambda_p -> 0)"


def _check_occupied(cfg: ExperimentConfig, base: RngStream, workers: int):
    net = cfg.network()
    if net.lambda_p <= 0.0:
        return _skip("lambda_p = 0")
    est = estimate_secondary_outage(net, min(cfg.trials, 10_000), base.substream(114),
                                    cfg.window_radius, workers, conditioning="occupied")
    return est.probability >= 0.9, _f(est.probability), ">= 0.9"


def _check_clamp(cfg: ExperimentConfig, base: RngStream, workers: int):
    from .analytic import approx_secondary_outage

    net = NetworkConfig(lambda_p=0.05, lambda_s=0.0, power_ratio=8.0, r_g=1.0,
                        r_h=0.5, eta=0.5, alpha=4.0, theta_p=5.0, theta_s=0.05,
                        eps_p=0.2, eps_s=0.4)
    res = approx_secondary_outage(net, 0.0, min(cfg.mu_trials, 20_000),
                                  base.substream(115), cfg.window_radius, workers)
    ok = res.clamped and res.estimate.probability == 0.0
    return ok, f"clamped={res.clamped} probability={_f(res.estimate.probability)}", \
        "clamped, probability 0"


def _check_worker_determinism(cfg: ExperimentConfig, base: RngStream, workers: int):
    net = cfg.network()
    t = min(cfg.trials, 20_000)
    e1 = estimate_primary_outage(net, t, base.substream(116), cfg.window_radius, workers=1)
    e3 = estimate_primary_outage(net, t, base.substream(116), cfg.window_radius, workers=3)
    return e1 == e3, "identical" if e1 == e3 else "different", "identical estimates"


def _reference_totals(net: NetworkConfig, args: tuple) -> tuple[np.ndarray, float]:
    """Recompute a block's interference totals from its raw arrays using the
    public geometry operations, and audit the guard-zone exclusion: returns
    (totals, min nearest-primary distance among transmitters)."""
    px, py, poff, sx, sy, soff, charged, use_star = args
    win = Window(1e9)  # containment was already enforced at sampling time
    star = Point2D(1.0, 0.0)
    n = poff.shape[0] - 1
    out = np.empty(n)
    min_clearance = math.inf
    for t in range(n):
        pts = np.column_stack((px[poff[t]:poff[t + 1]], py[poff[t]:poff[t + 1]]))
        psamp = PointSample(pts, 1.0, win)
        total = shot_noise(_ORIGIN, psamp, net.alpha, 1.0)
        tx_rows = []
        for j in range(soff[t], soff[t + 1]):
            if not charged[j]:
                continue
            p = Point2D(sx[j], sy[j])
            if use_star and math.hypot(p.x - star.x, p.y - star.y) <= net.r_g:
                continue
            d = nearest_distance(p, psamp)
            if d <= net.r_g:
                continue
            min_clearance = min(min_clearance, d)
            tx_rows.append((p.x, p.y))
        if tx_rows:
            tsamp = PointSample(np.asarray(tx_rows), 1.0, win)
            total += shot_noise(_ORIGIN, tsamp, net.alpha, net.power_ratio)
        out[t] = total
    return out, min_clearance


def _check_suppression(cfg: ExperimentConfig, base: RngStream, workers: int):
    net = cfg.network()
    if net.lambda_p <= 0.0 or net.lambda_s <= 0.0:
        return _skip("needs positive densities")
    pi_1 = derive(net).pi_1
    worst = 0.0
    clearance = math.inf
    for i, scenario in enumerate(("primary", "secondary")):
        args = _draw_block(net, scenario, 200, cfg.window_radius, pi_1,
                           base.substream(117, i))
        kernel = _kernels.interference_totals(
            args[0], args[1], args[2], args[3], args[4], args[5], args[6],
            net.r_g * net.r_g, net.power_ratio, net.alpha / 2.0, 1.0, args[7])
        ref, clear = _reference_totals(net, args)
        clearance = min(clearance, clear)
        scale = np.maximum(np.abs(ref), 1e-300)
        worst = max(worst, float(np.max(np.abs(kernel - ref) / scale)))
    if clearance <= net.r_g:
        return False, f"transmitter at clearance {_f(clearance)}", f"> r_g = {net.r_g:g}"
    return worst <= 1e-9, _f(worst), "<= 1e-9 relative (independent recomputation)"


_CHECKS = (
    ("mapping_rescaling", _check_mapping),
    ("superposition_additivity", _check_superposition),
    ("chain_transmit_frequency", _check_chain),
    ("positional_transmit_frequency", _check_positional),
    ("stable_law_agreement", _check_stable_law),
    ("density_inversion_roundtrip", _check_roundtrip),
    ("primary_outage_agreement", _check_primary_agreement),
    ("secondary_outage_agreement", _check_secondary_agreement),
    ("optimizer_grid_agreement", _check_optimizer_grid),
    ("case_boundary_continuity", _check_case_boundary),
    ("throughput_linearity", _check_linearity),
    ("frozen_slope_identity", _check_frozen_slope),
    ("inverse_proportionality", _check_inverse_prop),
    ("occupied_conditioning_outage", _check_occupied),
    ("secondary_clamp_flag", _check_clamp),
    ("worker_count_determinism", _check_worker_determinism),
    ("kernel_suppression_audit", _check_suppression),
)


def run_validation(cfg: ExperimentConfig, workers: int = 1) -> list[CheckResult]:
    base = RngStream(cfg.seed)
    results = []
    for name, fn in _CHECKS:
        try:
            passed, measured, bound = fn(cfg, base, workers)
        except Exception as exc:  # a crashed check is a failed check
            passed, measured, bound = False, f"error: {exc}", "no error"
        results.append(CheckResult(name, passed, measured, bound))
    return results


def render_report(cfg: ExperimentConfig, results: list[CheckResult]) -> str:
    """Report that re-parses as the validated config (checks live in comments)."""
    lines = ["# validation report", format_config(cfg).rstrip("\n")]
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        lines.append(f"# check {r.name}: {status} measured={r.measured} bound={r.bound}")
    npass = sum(r.passed for r in results)
    overall = "PASS" if npass == len(results) else "FAIL"
    lines.append(f"# result: {overall} ({npass}/{len(results)} checks passed)")
    return "\n".join(lines) + "\n"

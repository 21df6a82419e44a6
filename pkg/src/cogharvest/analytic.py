"""Closed-form probabilities, the interference CCDF estimator, and the
nominal-density inversion.

The chain of quantities: guard_prob/harvest_prob give the per-slot membership
probabilities p_g, p_h; tx_prob turns them into the stationary transmit
probability p_t of the two-state battery chain; tau_primary/tau_secondary
collapse the heterogeneous interferer field into one effective density of a
unit-power field; ccdf_unit_shotnoise estimates the probability that
unit-power shot noise at the origin exceeds 1; nominal_density inverts that
monotone map. For path-loss exponent 4 the shot-noise law is a one-sided
stable law with an elementary CCDF, `levy_ccdf_alpha4`, kept as an
independent cross-check of the Monte Carlo estimator — the two routes must
never be merged.

Monte Carlo estimators draw only point radii: interference at the origin is a
function of distances alone, and the radial law of a uniform disk point is
sampled exactly by r = W*sqrt(1-u). Sampling order per trial block is fixed
(counts, then radii) so results are reproducible for any worker count.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import erf, erfinv

from . import _kernels
from .config import NetworkConfig
from .rng import RngStream

__all__ = [
    "DegenerateChainError",
    "OutageEstimate",
    "TxProbability",
    "DerivedProbabilities",
    "NominalDensities",
    "ApproxOutage",
    "ApproxSecondaryOutage",
    "guard_prob",
    "harvest_prob",
    "tx_prob",
    "derive",
    "tau_primary",
    "tau_secondary",
    "shot_noise_sums",
    "ccdf_unit_shotnoise",
    "ccdf_curve",
    "levy_ccdf_alpha4",
    "levy_nominal_alpha4",
    "nominal_density",
    "secondary_ccdf_target",
    "solve_nominal_densities",
    "approx_primary_outage",
    "approx_secondary_outage",
]


class DegenerateChainError(ValueError):
    """Battery chain has no stationary transmit behavior (p_h=0 and p_g=1)."""


@dataclass(frozen=True)
class OutageEstimate:
    """Monte Carlo outage probability with a 95% normal confidence half-width."""

    probability: float
    trials: int
    ci_halfwidth: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.probability <= 1.0:
            raise ValueError("probability must lie in [0, 1]")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.ci_halfwidth >= 0.0:
            raise ValueError("ci_halfwidth must be nonnegative")

    @classmethod
    def from_counts(cls, failures: int, trials: int) -> "OutageEstimate":
        if not 0 <= failures <= trials:
            raise ValueError("failures must lie in [0, trials]")
        p = failures / trials
        return cls(p, trials, 1.96 * math.sqrt(p * (1.0 - p) / trials))


def guard_prob(lambda_p: float, r_g: float) -> float:
    """Probability that a point lies within r_g of some primary transmitter:
    1 - exp(-pi * lambda_p * r_g**2)."""
    if lambda_p < 0.0 or r_g < 0.0:
        raise ValueError("lambda_p and r_g must be nonnegative")
    return -math.expm1(-math.pi * lambda_p * r_g * r_g)


def harvest_prob(lambda_p: float, r_h: float) -> float:
    """Probability of lying within r_h of some primary transmitter."""
    if lambda_p < 0.0 or r_h < 0.0:
        raise ValueError("lambda_p and r_h must be nonnegative")
    return -math.expm1(-math.pi * lambda_p * r_h * r_h)


class TxProbability(NamedTuple):
    p_t: float
    pi_0: float
    pi_1: float


def tx_prob(p_g: float, p_h: float) -> TxProbability:
    """Stationary transmit probability of the two-state battery chain.

    From empty, the battery charges with probability p_h; from charged, it
    transmits (and empties) with probability 1-p_g, else holds. Note the
    inputs are geometry-only: transmit power never enters.
    """
    if not 0.0 <= p_g <= 1.0 or not 0.0 <= p_h <= 1.0:
        raise ValueError("p_g and p_h must lie in [0, 1]")
    denom = p_h + 1.0 - p_g
    if denom == 0.0:
        raise DegenerateChainError(
            "p_h = 0 with p_g = 1: the chain never transmits nor charges"
        )
    pi_1 = p_h / denom
    pi_0 = (1.0 - p_g) / denom
    return TxProbability(pi_1 * (1.0 - p_g), pi_0, pi_1)


def tau_primary(cfg: NetworkConfig, p_t: float) -> float:
    """Effective unit-power interferer density seen by a primary receiver:
    theta_p**(2/alpha) * (p_t*lambda_s*(P_s/P_p)**(2/alpha) + lambda_p)."""
    e = 2.0 / cfg.alpha
    return cfg.theta_p ** e * (p_t * cfg.lambda_s * cfg.power_ratio ** e + cfg.lambda_p)


def tau_secondary(cfg: NetworkConfig, p_t: float) -> float:
    """Effective density seen by a secondary receiver:
    theta_s**(2/alpha) * (p_t*lambda_s + lambda_p*(P_s/P_p)**(-2/alpha))."""
    e = 2.0 / cfg.alpha
    return cfg.theta_s ** e * (p_t * cfg.lambda_s + cfg.lambda_p * cfg.power_ratio ** (-e))


@dataclass(frozen=True)
class DerivedProbabilities:
    """All chain and effective-density quantities for one configuration."""

    p_g: float
    p_h: float
    p_t: float
    pi_0: float
    pi_1: float
    tau_p: float
    tau_s: float

    def __post_init__(self) -> None:
        for name in ("p_g", "p_h", "p_t", "pi_0", "pi_1"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if abs(self.pi_0 + self.pi_1 - 1.0) > 1e-12:
            raise ValueError("pi_0 + pi_1 must equal 1")
        if abs(self.p_t - self.pi_1 * (1.0 - self.p_g)) > 1e-15:
            raise ValueError("p_t must equal pi_1 * (1 - p_g)")
        if self.tau_p < 0.0 or self.tau_s < 0.0:
            raise ValueError("effective densities must be nonnegative")


def derive(cfg: NetworkConfig) -> DerivedProbabilities:
    p_g = guard_prob(cfg.lambda_p, cfg.r_g)
    p_h = harvest_prob(cfg.lambda_p, cfg.r_h)
    p_t, pi_0, pi_1 = tx_prob(p_g, p_h)
    return DerivedProbabilities(
        p_g=p_g, p_h=p_h, p_t=p_t, pi_0=pi_0, pi_1=pi_1,
        tau_p=tau_primary(cfg, p_t), tau_s=tau_secondary(cfg, p_t),
    )


def levy_ccdf_alpha4(density: float) -> float:
    """Exact Pr(unit-power shot noise > 1) for path-loss exponent 4.

    The shot noise of a density-lambda field with kernel r**-4 is one-sided
    stable with Laplace transform exp(-pi**1.5 * lambda * sqrt(s)), whose
    exceedance probability at level 1 is erf(pi**1.5 * lambda / 2). Used only
    as an oracle against the Monte Carlo estimator.
    """
    if density < 0.0:
        raise ValueError("density must be nonnegative")
    return float(erf(math.pi ** 1.5 * density / 2.0))


def levy_nominal_alpha4(target: float) -> float:
    """Inverse of levy_ccdf_alpha4: the density whose exceedance equals target."""
    if not 0.0 <= target < 1.0:
        raise ValueError("target must lie in [0, 1)")
    return float(2.0 * erfinv(target) / math.pi ** 1.5)


def _block_sizes(density: float, trials: int, window_radius: float) -> list[int]:
    """Fixed trial-block decomposition (independent of worker count)."""
    per_trial = density * math.pi * window_radius * window_radius
    size = int(4_000_000 / max(per_trial, 1.0))
    size = max(512, min(65536, size))
    sizes = [size] * (trials // size)
    if trials % size:
        sizes.append(trials % size)
    return sizes


def _sum_block(density, alpha, n_trials, window_radius, stream: RngStream) -> np.ndarray:
    # canonical order: trial counts first, then one uniform per point radius
    g = stream.generator()
    area = math.pi * window_radius * window_radius
    counts = g.poisson(density * area, size=n_trials)
    offsets = np.zeros(n_trials + 1, dtype=np.int64)
    np.cumsum(counts, out=offsets[1:])
    u = g.random(int(offsets[-1]))
    r2 = (window_radius * window_radius) * (1.0 - u)
    return _kernels.power_sums(r2, offsets, alpha / 2.0)


def shot_noise_sums(
    density: float,
    alpha: float,
    trials: int,
    rng: RngStream,
    window_radius: float = 50.0,
    workers: int = 1,
) -> np.ndarray:
    """Per-trial unit-power shot-noise totals at the origin.

    Each trial draws a fresh Poisson field of the given density in a disk of
    window_radius and sums r**-alpha over its points. Block b of the fixed
    decomposition uses rng.substream(b), so the result is identical for any
    worker count.
    """
    if density < 0.0 or not math.isfinite(density):
        raise ValueError("density must be nonnegative and finite")
    if alpha <= 2.0:
        raise ValueError("path-loss exponent must exceed 2")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    sizes = _block_sizes(density, trials, window_radius)

    def run(b: int) -> np.ndarray:
        return _sum_block(density, alpha, sizes[b], window_radius, rng.substream(b))

    if workers > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, range(len(sizes))))
    else:
        parts = [run(b) for b in range(len(sizes))]
    return np.concatenate(parts)


def ccdf_unit_shotnoise(
    density: float,
    alpha: float,
    trials: int,
    rng: RngStream,
    window_radius: float = 50.0,
    workers: int = 1,
) -> OutageEstimate:
    """Monte Carlo Pr(unit-power shot noise at origin > 1)."""
    sums = shot_noise_sums(density, alpha, trials, rng, window_radius, workers)
    return OutageEstimate.from_counts(int(np.count_nonzero(sums > 1.0)), trials)


def ccdf_curve(
    densities,
    alpha: float,
    trials: int,
    rng: RngStream,
    window_radius: float = 50.0,
    workers: int = 1,
) -> list[OutageEstimate]:
    """Coupled CCDF estimates over several densities from one realization set.

    A density-lambda field is a rescaled copy of the reference-density field,
    and rescaling points by a multiplies the shot noise by a**-alpha exactly;
    so the exceedance at density lam equals the fraction of reference sums
    above (ref/lam)**(alpha/2). Sharing one sample makes the curve exactly
    monotone in density, and the effective window at lam < ref is larger than
    window_radius, so truncation never worsens.
    """
    lams = [float(x) for x in densities]
    if any(x < 0.0 for x in lams):
        raise ValueError("densities must be nonnegative")
    ref = max(lams, default=0.0)
    if ref == 0.0:
        return [OutageEstimate(0.0, trials, 0.0) for _ in lams]
    sums = shot_noise_sums(ref, alpha, trials, rng, window_radius, workers)
    out = []
    for lam in lams:
        if lam == 0.0:
            out.append(OutageEstimate(0.0, trials, 0.0))
            continue
        thr = (ref / lam) ** (alpha / 2.0)
        out.append(OutageEstimate.from_counts(int(np.count_nonzero(sums > thr)), trials))
    return out


@dataclass(frozen=True)
class NominalDensities:
    """Solver output: densities whose shot-noise exceedance hits the targets."""

    mu_p: float
    mu_s: float
    solver_trials: int
    solver_tolerance: float

    def __post_init__(self) -> None:
        if not (self.mu_p > 0.0 and self.mu_s > 0.0):
            raise ValueError("nominal densities must be positive")
        if self.solver_trials < 1 or not self.solver_tolerance > 0.0:
            raise ValueError("invalid solver settings")


def nominal_density(
    target: float,
    alpha: float,
    trials: int,
    tolerance: float,
    rng: RngStream,
    window_radius: float = 50.0,
    initial_hi: float = 0.25,
    max_widenings: int = 8,
    workers: int = 1,
) -> float:
    """Density at which Pr(unit shot noise > 1) equals target, by bisection.

    Common random numbers: one canonical sum sample is drawn at the bracket
    top and reused at every candidate density through the exact rescaling
    identity (see ccdf_curve), making the bisected function deterministic and
    exactly monotone. A bracket top that is still below the target is
    quadrupled (with a fresh canonical sample) up to max_widenings times.
    """
    if not 0.0 < target < 1.0:
        raise ValueError("target must lie in (0, 1)")
    if not tolerance > 0.0:
        raise ValueError("tolerance must be positive")
    hi = initial_hi
    sums = None
    for attempt in range(max_widenings):
        s = np.sort(shot_noise_sums(hi, alpha, trials, rng.substream(attempt),
                                    window_radius, workers))
        if trials - np.searchsorted(s, 1.0, side="right") >= target * trials:
            sums = s
            break
        hi *= 4.0
    if sums is None:
        raise RuntimeError(
            f"could not bracket target {target:g}: exceedance at density {hi:g} "
            f"is still below it after {max_widenings} widenings"
        )

    def fhat(lam: float) -> float:
        thr = (hi / lam) ** (alpha / 2.0)
        return float(trials - np.searchsorted(sums, thr, side="right")) / trials

    lo = 0.0
    up = hi
    best = math.inf
    for _ in range(200):
        mid = 0.5 * (lo + up)
        fm = fhat(mid)
        err = abs(fm - target)
        best = min(best, err)
        if err <= tolerance:
            return mid
        if fm < target:
            lo = mid
        else:
            up = mid
    raise RuntimeError(
        f"bisection did not reach tolerance {tolerance:g} (best |gap| {best:.3g}); "
        "the Monte Carlo resolution 1/trials may be coarser than the tolerance"
    )


def secondary_ccdf_target(eps_s: float, p_g: float) -> float:
    """CCDF level that encodes the secondary outage cap: (1-p_g)*eps_s + p_g."""
    if not 0.0 < eps_s < 1.0:
        raise ValueError("eps_s must lie in (0, 1)")
    if not 0.0 <= p_g < 1.0:
        raise ValueError("p_g must lie in [0, 1)")
    return (1.0 - p_g) * eps_s + p_g


def solve_nominal_densities(
    cfg: NetworkConfig,
    trials: int,
    tolerance: float,
    rng: RngStream,
    window_radius: float = 50.0,
    workers: int = 1,
) -> NominalDensities:
    """Both nominal densities for a configuration.

    mu_p inverts the CCDF at eps_p. mu_s inverts it at (1-p_g)*eps_s + p_g,
    the level at which the guard-discounted secondary outage equals eps_s.
    """
    mu_p = nominal_density(cfg.eps_p, cfg.alpha, trials, tolerance,
                           rng.substream(0), window_radius, workers=workers)
    p_g = guard_prob(cfg.lambda_p, cfg.r_g)
    t_s = secondary_ccdf_target(cfg.eps_s, p_g)
    mu_s = nominal_density(t_s, cfg.alpha, trials, tolerance,
                           rng.substream(1), window_radius, workers=workers)
    return NominalDensities(mu_p, mu_s, trials, tolerance)


class ApproxOutage(NamedTuple):
    estimate: OutageEstimate
    levy: float | None


class ApproxSecondaryOutage(NamedTuple):
    estimate: OutageEstimate
    levy: float | None
    clamped: bool


def approx_primary_outage(
    cfg: NetworkConfig,
    p_t: float,
    trials: int,
    rng: RngStream,
    window_radius: float = 50.0,
    workers: int = 1,
) -> ApproxOutage:
    """Primary outage via the effective-density reduction: the transmitting
    interferer field is treated as one unit-power field of density tau_p.
    For alpha = 4 the exact stable-law value rides along for cross-checking."""
    tau = tau_primary(cfg, p_t)
    est = ccdf_unit_shotnoise(tau, cfg.alpha, trials, rng, window_radius, workers)
    levy = levy_ccdf_alpha4(tau) if cfg.alpha == 4.0 else None
    return ApproxOutage(est, levy)


def _discount(ccdf_value: float, p_g: float) -> tuple[float, bool]:
    raw = (ccdf_value - p_g) / (1.0 - p_g)
    return min(max(raw, 0.0), 1.0), raw < 0.0


def approx_secondary_outage(
    cfg: NetworkConfig,
    p_t: float,
    trials: int,
    rng: RngStream,
    window_radius: float = 50.0,
    workers: int = 1,
) -> ApproxSecondaryOutage:
    """Secondary outage approximation (CCDF(tau_s) - p_g) / (1 - p_g).

    The guard-zone conditioning removes a p_g-mass of near-certain-outage
    configurations, which the unconditioned CCDF still contains; discounting
    can push the raw value below zero for small tau_s, in which case the
    result is clamped to 0 and flagged.
    """
    p_g = guard_prob(cfg.lambda_p, cfg.r_g)
    if p_g >= 1.0:
        raise ValueError("p_g = 1: every location is inside a guard zone")
    tau = tau_secondary(cfg, p_t)
    est = ccdf_unit_shotnoise(tau, cfg.alpha, trials, rng, window_radius, workers)
    prob, clamped = _discount(est.probability, p_g)
    scaled = OutageEstimate(prob, est.trials, est.ci_halfwidth / (1.0 - p_g))
    levy = None
    if cfg.alpha == 4.0:
        levy = _discount(levy_ccdf_alpha4(tau), p_g)[0]
    return ApproxSecondaryOutage(scaled, levy, clamped)

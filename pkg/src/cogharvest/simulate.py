"""Slot-level Monte Carlo of the actual network, with no effective-density
approximation of the transmitting-secondary field.

Scenarios. Primary link: receiver at the origin, its serving transmitter at
(1, 0); that transmitter contributes no interference but does cast a guard
zone. Secondary link: receiver at the origin, its transmitter at (1, 0);
the primary field is conditioned to keep the disk of radius r_g around the
transmitter empty (exact restriction sampling, no rejection), because a
transmitting secondary is by definition outside every guard zone. Secondary
transmitters elsewhere are charged i.i.d. with the stationary probability
pi_1 and transmit only when outside every guard disk — per-slot independent
resampling of positions makes the charged state independent of the current
geometry.

Determinism: trials are cut into fixed-size blocks; block b draws from
rng.substream(b) in a fixed order (primary counts, primary points, [occupied
disk counts and points,] secondary counts, secondary points, charge marks),
and blocks aggregate by integer counting in block order. Results are
identical for any worker count. Battery-chain runs are inherently sequential
and single-threaded.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.stats import poisson as _poisson

from . import _kernels
from .analytic import OutageEstimate, derive
from .config import NetworkConfig
from .geometry import (
    Point2D,
    Window,
    nearest_distance,
    sample_hppp,
    shot_noise,
    PointSample,
    _uniform_disk,
    _uniform_window_xy,
)
from .rng import RngStream, as_generator

__all__ = [
    "BatteryState",
    "SlotOutcome",
    "simulate_battery_chain",
    "empirical_tx_prob",
    "trace_slots",
    "probe_slot",
    "estimate_primary_outage",
    "estimate_secondary_outage",
    "primary_outage_curve",
    "secondary_outage_curve",
]

_STAR = (1.0, 0.0)  # serving-transmitter location; direction is arbitrary by isotropy
_WARMUP = 1000


@dataclass(frozen=True)
class BatteryState:
    """Two-level battery: empty or holding one full transmission's charge."""

    charged: bool


@dataclass(frozen=True)
class SlotOutcome:
    """One slot of a trace. SIR fields are None when the slot's scenario
    does not define them."""

    typical_in_guard: bool
    typical_in_harvest: bool
    typical_transmits: bool
    sir_p: float | None = None
    sir_s: float | None = None

    def __post_init__(self) -> None:
        if self.typical_transmits and self.typical_in_guard:
            raise ValueError("a node inside a guard zone must not transmit")
        for name in ("sir_p", "sir_s"):
            v = getattr(self, name)
            if v is not None and not v >= 0.0:
                raise ValueError(f"{name} must be nonnegative")


def simulate_battery_chain(
    p_g: float,
    p_h: float,
    slots: int,
    rng: "RngStream | np.random.Generator",
    warmup: int = _WARMUP,
) -> tuple[float, tuple[float, float]]:
    """Long-run transmit frequency and state occupancy of the abstract chain.

    From empty, charge with probability p_h; from charged, hold with
    probability p_g, else transmit and empty. The first min(warmup, slots-1)
    slots evolve the state but are not counted.
    """
    if not 0.0 <= p_g <= 1.0 or not 0.0 <= p_h <= 1.0:
        raise ValueError("p_g and p_h must lie in [0, 1]")
    if slots < 1:
        raise ValueError("slots must be >= 1")
    g = as_generator(rng)
    skip_left = min(warmup, slots - 1)
    state = 0
    tx = charged = counted = 0
    done = 0
    while done < slots:
        n = min(slots - done, 4_000_000)
        u = g.random(n)
        skip = max(0, min(skip_left, n))
        t, c, k, state = _kernels.chain_counts(u, p_g, p_h, skip, state)
        tx += t
        charged += c
        counted += k
        skip_left -= skip
        done += n
    p_t = tx / counted
    occ1 = charged / counted
    return p_t, (1.0 - occ1, occ1)


def _positional_block_slots(lambda_p: float, window_radius: float) -> int:
    per_slot = lambda_p * math.pi * window_radius * window_radius
    return max(1024, min(100_000, int(3_000_000 / max(per_slot, 1.0))))


def empirical_tx_prob(
    cfg: NetworkConfig,
    slots: int,
    rng: RngStream,
    window_radius: float = 50.0,
    warmup: int = _WARMUP,
) -> float:
    """Transmit frequency of a probe node at the origin under the positional
    model: each slot resamples the primary field; the probe charges when its
    nearest primary transmitter is within r_h and, once charged, transmits
    when that distance exceeds r_g.

    Only the nearest-transmitter distance enters, so each slot draws point
    radii alone (exact by isotropy): r = W*sqrt(1-u).
    """
    if slots < 1:
        raise ValueError("slots must be >= 1")
    area = math.pi * window_radius * window_radius
    rg2 = cfg.r_g * cfg.r_g
    rh2 = cfg.r_h * cfg.r_h
    w2 = window_radius * window_radius
    block = _positional_block_slots(cfg.lambda_p, window_radius)
    skip_left = min(warmup, slots - 1)
    state = 0
    tx = counted = 0
    done = 0
    b = 0
    while done < slots:
        n = min(slots - done, block)
        g = rng.substream(b).generator()
        counts = g.poisson(cfg.lambda_p * area, size=n)
        offsets = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(counts, out=offsets[1:])
        r2 = w2 * (1.0 - g.random(int(offsets[-1])))
        skip = max(0, min(skip_left, n))
        t, _, k, state = _kernels.positional_chain_block(r2, offsets, rg2, rh2, skip, state)
        tx += t
        counted += k
        skip_left -= skip
        done += n
        b += 1
    return tx / counted


def trace_slots(
    cfg: NetworkConfig,
    slots: int,
    rng: RngStream,
    window_radius: float = 50.0,
) -> list[SlotOutcome]:
    """Per-slot record of the positional battery simulation (battery starts
    empty, no warm-up discard). SIR fields are not defined here."""
    if slots < 1:
        raise ValueError("slots must be >= 1")
    g = rng.generator()
    area = math.pi * window_radius * window_radius
    w2 = window_radius * window_radius
    out = []
    charged = False
    for _ in range(slots):
        n = int(g.poisson(cfg.lambda_p * area))
        d2 = np.min(w2 * (1.0 - g.random(n))) if n else math.inf
        in_harvest = d2 <= cfg.r_h * cfg.r_h
        in_guard = d2 <= cfg.r_g * cfg.r_g
        transmits = False
        if charged:
            if not in_guard:
                transmits = True
                charged = False
        elif in_harvest:
            charged = True
        out.append(SlotOutcome(in_guard, in_harvest, transmits))
    return out


# ---------------------------------------------------------------------------
# outage estimation
# ---------------------------------------------------------------------------

def _sim_block_sizes(cfg: NetworkConfig, trials: int, window_radius: float) -> list[int]:
    per_trial = (cfg.lambda_p + cfg.lambda_s) * math.pi * window_radius * window_radius
    size = max(256, min(8192, int(3_000_000 / max(per_trial, 1.0))))
    sizes = [size] * (trials // size)
    if trials % size:
        sizes.append(trials % size)
    return sizes


def _lens_points(g: np.random.Generator, total: int, window_radius: float,
                 r_g: float) -> tuple[np.ndarray, np.ndarray]:
    """Uniform points in b(star, r_g) ∩ window, by redraw against the window."""
    x, y = _uniform_disk(g, total, r_g)
    x += _STAR[0]
    y += _STAR[1]
    w2 = window_radius * window_radius
    bad = x * x + y * y > w2
    while np.any(bad):
        k = int(bad.sum())
        nx, ny = _uniform_disk(g, k, r_g)
        nx += _STAR[0]
        ny += _STAR[1]
        x[bad], y[bad] = nx, ny
        idx = np.flatnonzero(bad)
        bad[:] = False
        bad[idx[nx * nx + ny * ny > w2]] = True
    return x, y


def _draw_block(
    cfg: NetworkConfig,
    scenario: str,
    n_trials: int,
    window_radius: float,
    pi_1: float,
    stream: RngStream,
) -> tuple:
    """Draw one block's raw arrays in the fixed canonical order; returns the
    kernel argument tuple (px, py, poff, sx, sy, soff, charged, use_star)."""
    g = stream.generator()
    if scenario == "primary":
        window_p = Window(window_radius)
        use_star = True
    else:
        window_p = Window(window_radius, (Point2D(*_STAR), cfg.r_g))
        use_star = False

    n_p = g.poisson(cfg.lambda_p * window_p.admissible_area(), size=n_trials)
    px, py = _uniform_window_xy(g, int(n_p.sum()), window_p)

    if scenario == "secondary_occupied":
        # condition the excluded disk on holding at least one primary
        # transmitter: zero-truncated Poisson count, uniform points in the disk
        lens_area = window_p.area() - window_p.admissible_area()
        m = cfg.lambda_p * lens_area
        if m <= 0.0:
            raise ValueError("occupied conditioning needs lambda_p > 0")
        q = math.exp(-m) + g.random(n_trials) * -math.expm1(-m)
        n_lens = np.maximum(_poisson.ppf(q, m).astype(np.int64), 1)
        lx, ly = _lens_points(g, int(n_lens.sum()), window_radius, cfg.r_g)
        pieces_x, pieces_y = [], []
        po = np.zeros(n_trials + 1, dtype=np.int64)
        np.cumsum(n_p, out=po[1:])
        lo = np.zeros(n_trials + 1, dtype=np.int64)
        np.cumsum(n_lens, out=lo[1:])
        for t in range(n_trials):
            pieces_x += [px[po[t]:po[t + 1]], lx[lo[t]:lo[t + 1]]]
            pieces_y += [py[po[t]:po[t + 1]], ly[lo[t]:lo[t + 1]]]
        px = np.concatenate(pieces_x)
        py = np.concatenate(pieces_y)
        n_p = n_p + n_lens

    poff = np.zeros(n_trials + 1, dtype=np.int64)
    np.cumsum(n_p, out=poff[1:])

    area_s = math.pi * window_radius * window_radius
    n_s = g.poisson(cfg.lambda_s * area_s, size=n_trials)
    soff = np.zeros(n_trials + 1, dtype=np.int64)
    np.cumsum(n_s, out=soff[1:])
    sx, sy = _uniform_disk(g, int(soff[-1]), window_radius)
    charged = g.random(int(soff[-1])) < pi_1
    return px, py, poff, sx, sy, soff, charged, use_star


def _interference_block(
    cfg: NetworkConfig,
    scenario: str,
    n_trials: int,
    window_radius: float,
    pi_1: float,
    stream: RngStream,
) -> np.ndarray:
    """Per-trial interference totals at the origin for one block. Sampling
    order is fixed; see the module docstring."""
    px, py, poff, sx, sy, soff, charged, use_star = _draw_block(
        cfg, scenario, n_trials, window_radius, pi_1, stream)
    return _kernels.interference_totals(
        px, py, poff, sx, sy, soff, charged,
        cfg.r_g * cfg.r_g, cfg.power_ratio, cfg.alpha / 2.0, _STAR[0], use_star,
    )


def _outage_counts(
    cfg: NetworkConfig,
    scenario: str,
    thresholds: np.ndarray,
    trials: int,
    rng: RngStream,
    window_radius: float,
    workers: int,
) -> np.ndarray:
    pi_1 = derive(cfg).pi_1
    sizes = _sim_block_sizes(cfg, trials, window_radius)

    def run(b: int) -> np.ndarray:
        itot = _interference_block(cfg, scenario, sizes[b], window_radius,
                                   pi_1, rng.substream(b))
        return np.array([np.count_nonzero(itot > thr) for thr in thresholds],
                        dtype=np.int64)

    if workers > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, range(len(sizes))))
    else:
        parts = [run(b) for b in range(len(sizes))]
    return np.sum(parts, axis=0)


def estimate_primary_outage(
    cfg: NetworkConfig,
    trials: int,
    rng: RngStream,
    window_radius: float = 50.0,
    workers: int = 1,
) -> OutageEstimate:
    """Pr(SIR of the primary link < theta_p) by direct slot simulation."""
    return primary_outage_curve(cfg, [cfg.theta_p], trials, rng,
                                window_radius, workers)[0]


def primary_outage_curve(
    cfg: NetworkConfig,
    thetas,
    trials: int,
    rng: RngStream,
    window_radius: float = 50.0,
    workers: int = 1,
) -> list[OutageEstimate]:
    """Primary outage at several SIR targets from one shared realization set
    (outage at theta is the event interference > 1/theta, so the per-theta
    estimates are coupled and monotone)."""
    th = np.asarray([float(t) for t in thetas])
    if th.size == 0 or np.any(th <= 0.0):
        raise ValueError("SIR targets must be positive")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    counts = _outage_counts(cfg, "primary", 1.0 / th, trials, rng,
                            window_radius, workers)
    return [OutageEstimate.from_counts(int(c), trials) for c in counts]


def estimate_secondary_outage(
    cfg: NetworkConfig,
    trials: int,
    rng: RngStream,
    window_radius: float = 50.0,
    workers: int = 1,
    conditioning: str = "clear",
) -> OutageEstimate:
    """Pr(SIR of the secondary link < theta_s) by direct slot simulation.

    conditioning="clear" keeps the guard disk around the transmitter free of
    primary transmitters (the situation in which it transmits at all);
    "occupied" conditions on the complement, at least one primary transmitter
    inside that disk."""
    return secondary_outage_curve(cfg, [cfg.theta_s], trials, rng,
                                  window_radius, workers, conditioning)[0]


def secondary_outage_curve(
    cfg: NetworkConfig,
    thetas,
    trials: int,
    rng: RngStream,
    window_radius: float = 50.0,
    workers: int = 1,
    conditioning: str = "clear",
) -> list[OutageEstimate]:
    th = np.asarray([float(t) for t in thetas])
    if th.size == 0 or np.any(th <= 0.0):
        raise ValueError("SIR targets must be positive")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if conditioning not in ("clear", "occupied"):
        raise ValueError("conditioning must be 'clear' or 'occupied'")
    scenario = "secondary" if conditioning == "clear" else "secondary_occupied"
    counts = _outage_counts(cfg, scenario, cfg.power_ratio / th, trials, rng,
                            window_radius, workers)
    return [OutageEstimate.from_counts(int(c), trials) for c in counts]


# ---------------------------------------------------------------------------
# slow-path probe built purely from the geometry operations; cross-validates
# the block kernels on the same scenarios
# ---------------------------------------------------------------------------

def probe_slot(
    cfg: NetworkConfig,
    rng: "RngStream | np.random.Generator",
    scenario: str = "primary",
    window_radius: float = 50.0,
) -> SlotOutcome:
    """Simulate one slot of the primary or secondary outage scenario using
    only the public geometry operations. Requires positive densities."""
    if cfg.lambda_p <= 0.0 or cfg.lambda_s <= 0.0:
        raise ValueError("probe_slot needs positive densities")
    if scenario not in ("primary", "secondary"):
        raise ValueError("scenario must be 'primary' or 'secondary'")
    g = as_generator(rng)
    star = Point2D(*_STAR)
    if scenario == "primary":
        window_p = Window(window_radius)
    else:
        window_p = Window(window_radius, (star, cfg.r_g))
    pts = sample_hppp(cfg.lambda_p, window_p, g)
    window_s = Window(window_radius)
    sts = sample_hppp(cfg.lambda_s, window_s, g)
    pi_1 = derive(cfg).pi_1
    charged = g.random(len(sts)) < pi_1

    tx_rows = []
    for i in range(len(sts)):
        if not charged[i]:
            continue
        p = Point2D(sts.points[i, 0], sts.points[i, 1])
        if scenario == "primary" and math.hypot(p.x - star.x, p.y - star.y) <= cfg.r_g:
            continue
        if nearest_distance(p, pts) <= cfg.r_g:
            continue
        tx_rows.append(sts.points[i])

    origin = Point2D(0.0, 0.0)
    total = shot_noise(origin, pts, cfg.alpha, 1.0) if len(pts) else 0.0
    if tx_rows:
        txs = PointSample(np.asarray(tx_rows), cfg.lambda_s, window_s)
        total += shot_noise(origin, txs, cfg.alpha, cfg.power_ratio)
    if scenario == "primary":
        sir = 1.0 / total if total > 0.0 else math.inf
        return SlotOutcome(False, False, False, sir_p=sir)
    sir = cfg.power_ratio / total if total > 0.0 else math.inf
    return SlotOutcome(False, False, True, sir_s=sir)

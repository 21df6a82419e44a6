"""Stochastic-geometry analysis of an RF-energy-harvesting secondary network
sharing spectrum with a primary network.

The package derives closed-form transmit/outage probabilities for the
two-network model, validates them against direct Monte Carlo simulation of
the point processes, inverts outage targets into nominal interferer
densities, and solves the secondary density/power pair that maximizes
spatial throughput under both networks' outage caps.

``active_backend()`` reports whether the hot sampling kernels run compiled
(numba) or as pure numpy; both produce identical integer statistics and
per-backend bit-identical results (see the ``_kernels`` module docstring).
"""
from ._kernels import BACKEND as _BACKEND
from .analytic import (
    ApproxOutage,
    ApproxSecondaryOutage,
    DegenerateChainError,
    DerivedProbabilities,
    NominalDensities,
    OutageEstimate,
    TxProbability,
    approx_primary_outage,
    approx_secondary_outage,
    ccdf_curve,
    ccdf_unit_shotnoise,
    derive,
    guard_prob,
    harvest_prob,
    levy_ccdf_alpha4,
    levy_nominal_alpha4,
    nominal_density,
    secondary_ccdf_target,
    shot_noise_sums,
    solve_nominal_densities,
    tau_primary,
    tau_secondary,
    tx_prob,
)
from .config import ConfigError, ExperimentConfig, NetworkConfig, format_config, parse_config
from .geometry import (
    Point2D,
    PointSample,
    SingularityError,
    Window,
    in_disk_union,
    nearest_distance,
    sample_hppp,
    scale_points,
    shot_noise,
    superpose,
)
from .optimize import (
    AdmissibleRegion,
    InfeasibleRegionError,
    MuSolverSettings,
    OptimizationResult,
    admissible_region,
    case1_solution,
    case2_solution,
    grid_oracle,
    solve_p1,
    throughput,
    throughput_sweep,
)
from .rng import RngStream
from .simulate import (
    SlotOutcome,
    empirical_tx_prob,
    estimate_primary_outage,
    estimate_secondary_outage,
    primary_outage_curve,
    probe_slot,
    secondary_outage_curve,
    simulate_battery_chain,
    trace_slots,
)
from .validate import CheckResult, render_report, run_validation

__version__ = "0.1.0"


def active_backend() -> str:
    """Kernel backend in use: "numba" or "numpy"."""
    return _BACKEND


__all__ = [
    "ApproxOutage",
    "ApproxSecondaryOutage",
    "AdmissibleRegion",
    "CheckResult",
    "ConfigError",
    "DegenerateChainError",
    "DerivedProbabilities",
    "ExperimentConfig",
    "InfeasibleRegionError",
    "MuSolverSettings",
    "NetworkConfig",
    "NominalDensities",
    "OptimizationResult",
    "OutageEstimate",
    "Point2D",
    "PointSample",
    "RngStream",
    "SingularityError",
    "SlotOutcome",
    "TxProbability",
    "Window",
    "active_backend",
    "admissible_region",
    "approx_primary_outage",
    "approx_secondary_outage",
    "case1_solution",
    "case2_solution",
    "ccdf_curve",
    "ccdf_unit_shotnoise",
    "derive",
    "empirical_tx_prob",
    "estimate_primary_outage",
    "estimate_secondary_outage",
    "format_config",
    "grid_oracle",
    "guard_prob",
    "harvest_prob",
    "in_disk_union",
    "levy_ccdf_alpha4",
    "levy_nominal_alpha4",
    "nearest_distance",
    "nominal_density",
    "parse_config",
    "primary_outage_curve",
    "probe_slot",
    "render_report",
    "run_validation",
    "sample_hppp",
    "scale_points",
    "secondary_ccdf_target",
    "secondary_outage_curve",
    "shot_noise",
    "shot_noise_sums",
    "simulate_battery_chain",
    "solve_nominal_densities",
    "solve_p1",
    "superpose",
    "tau_primary",
    "tau_secondary",
    "throughput",
    "throughput_sweep",
    "trace_slots",
    "tx_prob",
    "__version__",
]

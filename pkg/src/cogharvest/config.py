"""Network and experiment configuration with a plain key = value file format.

``NetworkConfig`` carries the physical model parameters; ``ExperimentConfig``
adds the run-scale knobs (window size, trial counts, seed). Powers are
expressed as the secondary-to-primary ratio; the primary transmit power is the
unit of power throughout, and the transmitter-receiver link distance is the
unit of distance.

File format: UTF-8 text, one ``key = value`` per line, ``#`` starts a comment,
blank lines ignored. Unknown keys are errors; missing keys take the defaults
below; a later line for the same key overrides an earlier one. Command-line
overrides take precedence over the file.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace

__all__ = ["ConfigError", "NetworkConfig", "ExperimentConfig", "parse_config", "format_config"]


class ConfigError(ValueError):
    """Configuration rejected; carries the offending line number and key."""

    def __init__(self, message: str, line: int | None = None, key: str | None = None):
        loc = []
        if line is not None:
            loc.append(f"line {line}")
        if key is not None:
            loc.append(f"key {key!r}")
        super().__init__(f"{', '.join(loc)}: {message}" if loc else message)
        self.line = line
        self.key = key


def _require(cond: bool, message: str, key: str | None = None) -> None:
    if not cond:
        raise ConfigError(message, key=key)


@dataclass(frozen=True)
class NetworkConfig:
    """Model parameters.

    lambda_p, lambda_s: densities of primary and secondary transmitters
    (nodes per unit area). Zero is allowed so single-tier reductions can be
    evaluated. power_ratio: secondary transmit power over primary transmit
    power; the model requires it to stay within the one-slot harvest budget
    eta * r_h**-alpha, so a battery always charges fully in a single slot.
    r_g, r_h: guard and harvesting zone radii around a primary transmitter,
    with 0 < r_h < r_g. eta: harvesting efficiency in (0, 1]. alpha: path
    loss exponent, > 2. theta_p, theta_s: SIR targets. eps_p, eps_s: outage
    probability caps in (0, 1).
    """

    lambda_p: float = 0.01
    lambda_s: float = 0.1
    power_ratio: float = 0.1
    r_g: float = 2.0
    r_h: float = 1.0
    eta: float = 0.1
    alpha: float = 4.0
    theta_p: float = 5.0
    theta_s: float = 5.0
    eps_p: float = 0.2
    eps_s: float = 0.4

    def __post_init__(self) -> None:
        for f in fields(self):
            v = getattr(self, f.name)
            if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v):
                raise ConfigError("value must be a finite number", key=f.name)
            object.__setattr__(self, f.name, float(v))
        _require(self.lambda_p >= 0.0, "density must be >= 0", "lambda_p")
        _require(self.lambda_s >= 0.0, "density must be >= 0", "lambda_s")
        _require(self.alpha > 2.0, "path-loss exponent must exceed 2", "alpha")
        _require(self.r_h > 0.0 and self.r_g > 0.0 and self.r_h < self.r_g,
                 f"0 < r_h < r_g violated (r_h={self.r_h:g}, r_g={self.r_g:g})", "r_h")
        _require(0.0 < self.eta <= 1.0, "harvesting efficiency must be in (0, 1]", "eta")
        _require(self.theta_p > 0.0, "SIR target must be positive", "theta_p")
        _require(self.theta_s > 0.0, "SIR target must be positive", "theta_s")
        _require(0.0 < self.eps_p < 1.0, "outage cap must be in (0, 1)", "eps_p")
        _require(0.0 < self.eps_s < 1.0, "outage cap must be in (0, 1)", "eps_s")
        cap = self.power_cap()
        _require(0.0 < self.power_ratio <= cap,
                 f"power_ratio must be in (0, eta*r_h**-alpha = {cap:g}] "
                 "(one-slot full-charge budget)", "power_ratio")

    def power_cap(self) -> float:
        """Largest admissible power ratio: eta * r_h**-alpha."""
        return self.eta * self.r_h ** (-self.alpha)


_NETWORK_KEYS = tuple(f.name for f in fields(NetworkConfig))


@dataclass(frozen=True)
class ExperimentConfig:
    """NetworkConfig plus run-scale parameters.

    window_radius: sampling disk radius (unit link distances). trials: Monte
    Carlo trials per outage estimate. slots: slots per battery-chain run.
    mu_trials / mu_tolerance: trial count and probability-scale tolerance of
    the nominal-density solver. seed: master seed, 64-bit unsigned.
    """

    lambda_p: float = 0.01
    lambda_s: float = 0.1
    power_ratio: float = 0.1
    r_g: float = 2.0
    r_h: float = 1.0
    eta: float = 0.1
    alpha: float = 4.0
    theta_p: float = 5.0
    theta_s: float = 5.0
    eps_p: float = 0.2
    eps_s: float = 0.4
    window_radius: float = 50.0
    trials: int = 100_000
    slots: int = 1_000_000
    mu_trials: int = 200_000
    mu_tolerance: float = 1e-4
    seed: int = 0

    def __post_init__(self) -> None:
        self.network()  # network-parameter validation
        for name in ("trials", "slots", "mu_trials"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool) or v < 1:
                raise ConfigError("must be a positive integer", key=name)
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) \
                or not 0 <= self.seed < 2 ** 64:
            raise ConfigError("must be an unsigned 64-bit integer", key="seed")
        wr = self.window_radius
        if not isinstance(wr, (int, float)) or not math.isfinite(wr) or wr <= 0:
            raise ConfigError("must be a positive finite number", key="window_radius")
        object.__setattr__(self, "window_radius", float(wr))
        mt = self.mu_tolerance
        if not isinstance(mt, (int, float)) or not math.isfinite(mt) or mt <= 0:
            raise ConfigError("must be a positive finite number", key="mu_tolerance")
        object.__setattr__(self, "mu_tolerance", float(mt))

    def network(self) -> NetworkConfig:
        return NetworkConfig(**{k: getattr(self, k) for k in _NETWORK_KEYS})

    def with_overrides(self, **kwargs) -> "ExperimentConfig":
        return replace(self, **kwargs)


_INT_KEYS = ("trials", "slots", "mu_trials", "seed")
_EXPERIMENT_KEYS = tuple(f.name for f in fields(ExperimentConfig))
# accepted spelling for the power ratio in config files alongside power_ratio
_ALIASES = {"p_ratio": "power_ratio"}


def _parse_value(key: str, raw: str, line: int | None):
    try:
        if key in _INT_KEYS:
            try:
                return int(raw, 10)  # exact over the full u64 seed range
            except ValueError:
                v = float(raw)  # allow scientific notation such as 1e6
                if not v.is_integer():
                    raise ValueError
                return int(v)
        return float(raw)
    except ValueError:
        kind = "an integer" if key in _INT_KEYS else "a number"
        raise ConfigError(f"value {raw!r} is not {kind}", line=line, key=key) from None


def parse_config(
    path: str | None = None,
    text: str | None = None,
    overrides: dict | None = None,
) -> ExperimentConfig:
    """Build an ExperimentConfig from a file and/or explicit overrides.

    ``path`` and ``text`` are alternative sources of the file body (at most
    one). ``overrides`` maps canonical or alias key names to already-typed or
    string values and wins over the file.
    """
    if path is not None and text is not None:
        raise ValueError("pass path or text, not both")
    values: dict = {}
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path!r}: {exc}") from exc
    if text is not None:
        for lineno, rawline in enumerate(text.splitlines(), start=1):
            body = rawline.split("#", 1)[0].strip()
            if not body:
                continue
            if "=" not in body:
                raise ConfigError("expected 'key = value'", line=lineno)
            key, _, raw = body.partition("=")
            key = key.strip()
            raw = raw.strip()
            key = _ALIASES.get(key, key)
            if key not in _EXPERIMENT_KEYS:
                raise ConfigError("unknown key", line=lineno, key=key)
            if not raw:
                raise ConfigError("missing value", line=lineno, key=key)
            values[key] = _parse_value(key, raw, lineno)
    if overrides:
        for key, raw in overrides.items():
            key = _ALIASES.get(key, key)
            if key not in _EXPERIMENT_KEYS:
                raise ConfigError("unknown key", key=key)
            if isinstance(raw, str):
                values[key] = _parse_value(key, raw, None)
            elif key in _INT_KEYS:
                values[key] = int(raw)
            else:
                values[key] = float(raw)
    return ExperimentConfig(**values)


def format_config(cfg: ExperimentConfig) -> str:
    """Canonical ``key = value`` rendering; re-parses to an equal config."""
    lines = []
    for f in fields(ExperimentConfig):
        v = getattr(cfg, f.name)
        lines.append(f"{f.name} = {v:d}" if isinstance(v, int) else f"{f.name} = {v:.17g}")
    return "\n".join(lines) + "\n"

"""Experiment configuration: defaults, flat key=value config files, validation.

The defaults are the evaluation parameter set used throughout the repo:
an LTE-like interface 1 (slow recovery, expensive) and a Wi-Fi-like
interface 2 (fast recovery, cheap), a survival budget of 4 consecutive
misses, and long-horizon discounting.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .channel import GEParams
from .mdp import CostModel

AGENT_KINDS = ("fullmdp", "qmdp", "fpomdp", "hmdp")
ETA_SWEEP = (0.0, 0.03, 0.07, 0.2, 1.0)


class ConfigError(ValueError):
    """Invalid configuration value or key."""


class ConfigSyntaxError(ConfigError):
    """Config file text that does not parse as flat `key = value` lines."""


@dataclass(frozen=True)
class ExperimentConfig:
    p1: float = 0.0178
    r1: float = 0.2577
    p2: float = 0.0515
    r2: float = 0.9468
    e1: float = 200.0
    e2: float = 15.85
    eta: float = 0.07
    n_max: int = 4
    gamma: float = 0.99999
    epsilon: float = 1e-11
    k_max: int = 100_000
    episodes: int = 20_000
    base_seed: int = 20260810
    theta: float = 38.25
    agents: tuple[str, ...] = AGENT_KINDS

    def params(self) -> tuple[GEParams, GEParams]:
        return GEParams(self.p1, self.r1), GEParams(self.p2, self.r2)

    def cost_model(self, eta: float | None = None) -> CostModel:
        return CostModel(eta=self.eta if eta is None else eta, e1=self.e1, e2=self.e2)

    def validate(self) -> "ExperimentConfig":
        for name in ("p1", "r1", "p2", "r2"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ConfigError(f"{name} must be in [0, 1], got {v}")
        if self.p1 + self.r1 <= 0.0 or self.p2 + self.r2 <= 0.0:
            raise ConfigError("each interface needs p + r > 0")
        if self.e1 + self.e2 <= 0.0:
            raise ConfigError("total transmit power must be positive")
        if self.eta < 0.0:
            raise ConfigError("eta must be non-negative")
        if self.n_max < 1:
            raise ConfigError("n_max must be at least 1")
        if not (0.0 < self.gamma < 1.0):
            raise ConfigError("gamma must lie in (0, 1)")
        if self.epsilon <= 0.0:
            raise ConfigError("epsilon must be positive")
        if self.k_max < 1:
            raise ConfigError("k_max must be at least 1")
        if self.episodes < 1:
            raise ConfigError("episodes must be at least 1")
        if not (0 <= self.base_seed < 2 ** 64):
            raise ConfigError("base_seed must fit in 64 bits")
        if self.theta <= 0.0:
            raise ConfigError("theta must be positive")
        for kind in self.agents:
            if kind not in AGENT_KINDS and not kind.startswith("fixed:"):
                raise ConfigError(f"unknown agent kind {kind!r}")
        return self


_FIELD_PARSERS = {
    "p1": float, "r1": float, "p2": float, "r2": float,
    "e1": float, "e2": float, "eta": float,
    "n_max": int, "gamma": float, "epsilon": float,
    "k_max": lambda v: int(float(v)), "episodes": lambda v: int(float(v)),
    "base_seed": int, "theta": float,
    "agents": lambda v: tuple(s.strip() for s in v.split(",") if s.strip()),
}


def parse_config_text(text: str) -> ExperimentConfig:
    """Flat `key = value` lines; blank lines and `#` comments are ignored."""
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigSyntaxError(f"line {lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _FIELD_PARSERS:
            raise ConfigSyntaxError(f"line {lineno}: unknown key {key!r}")
        try:
            values[key] = _FIELD_PARSERS[key](value)
        except (ValueError, TypeError):
            raise ConfigSyntaxError(
                f"line {lineno}: bad value {value!r} for {key}"
            ) from None
    return ExperimentConfig(**values)


def load_config(path) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read())


def with_overrides(config: ExperimentConfig, **overrides) -> ExperimentConfig:
    clean = {k: v for k, v in overrides.items() if v is not None}
    return replace(config, **clean) if clean else config

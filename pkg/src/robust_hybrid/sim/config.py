"""Experiment configuration and its JSON form."""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass
from pathlib import Path

from ..cmls_gp import GpConfig
from ..hybrid_factorization import FactorizeConfig
from ..joint_design import DesignConfig

__all__ = ["SCHEMES", "ConfigError", "SystemConfig", "load_config", "parse_schemes"]

SCHEMES = ("R-HYB", "NR-HYB", "R-DB", "NR-DB")


class ConfigError(ValueError):
    pass


def parse_schemes(value) -> tuple:
    """Accept a comma-separated string or a sequence, case-insensitive."""
    items = value.split(",") if isinstance(value, str) else list(value)
    lookup = {s.lower(): s for s in SCHEMES}
    out = []
    for item in items:
        key = str(item).strip().lower()
        if key not in lookup:
            raise ConfigError(f"unknown scheme {item!r}; choose from {', '.join(SCHEMES)}")
        if lookup[key] not in out:
            out.append(lookup[key])
    if not out:
        raise ConfigError("at least one scheme is required")
    return tuple(out)


@dataclass(frozen=True)
class SystemConfig:
    """One experiment. Field names double as the JSON keys.

    ``n_rf_list`` empty means "use ``n_rf_t``/``n_rf_r``"; otherwise every
    entry sets both RF-chain counts. ``sweep`` picks the x-axis label when
    both lists have a single entry.
    """

    m_t: int = 128
    m_r: int = 72
    n_s: int = 4
    n_rf_t: int = 8
    n_rf_r: int = 8
    num_paths: int = 10
    delta_std_deg: float = 1.154
    snr_db_list: tuple = (0.0,)
    n_rf_list: tuple = ()
    trials: int = 1000
    seed: int = 0
    total_power: float = 1.0
    gain_variance: float = 1.0
    schemes: tuple = SCHEMES
    sweep: str = "snr"
    gp_eps_threshold: float = 1e-6
    gp_max_iterations: int = 200
    outer_eps_threshold: float = 1e-4
    outer_max_iterations: int = 50
    passes: int = 2
    second_stage_channel: str = "estimate"

    def __post_init__(self):
        set_ = lambda k, v: object.__setattr__(self, k, v)  # noqa: E731
        set_("snr_db_list", tuple(float(v) for v in self.snr_db_list))
        set_("n_rf_list", tuple(int(v) for v in self.n_rf_list))
        set_("schemes", parse_schemes(self.schemes))
        self.validate()

    def validate(self):
        for name in ("m_t", "m_r", "n_s", "n_rf_t", "n_rf_r", "num_paths", "trials", "passes"):
            v = getattr(self, name)
            if isinstance(v, bool) or int(v) != v or v < 1:
                raise ConfigError(f"{name} must be a positive integer, got {v!r}")
        if isinstance(self.seed, bool) or int(self.seed) != self.seed or self.seed < 0:
            raise ConfigError(f"seed must be a non-negative integer, got {self.seed!r}")
        if not (math.isfinite(self.delta_std_deg) and self.delta_std_deg >= 0):
            raise ConfigError(f"delta_std_deg must be finite and >= 0, got {self.delta_std_deg!r}")
        if not self.total_power > 0:
            raise ConfigError(f"total_power must be > 0, got {self.total_power!r}")
        if not self.gain_variance > 0:
            raise ConfigError(f"gain_variance must be > 0, got {self.gain_variance!r}")
        if not self.snr_db_list:
            raise ConfigError("snr_db_list must contain at least one value")
        if len(self.snr_db_list) > 1 and len(self.n_rf_list) > 1:
            raise ConfigError("sweep either snr_db_list or n_rf_list, not both")
        if self.sweep not in ("snr", "nrf"):
            raise ConfigError(f"sweep must be 'snr' or 'nrf', got {self.sweep!r}")
        for n_rf_t, n_rf_r in self.rf_points():
            if not self.n_s <= min(n_rf_t, n_rf_r):
                raise ConfigError(f"n_s={self.n_s} exceeds the RF-chain count ({n_rf_t}, {n_rf_r})")
            if n_rf_t > self.m_t or n_rf_r > self.m_r:
                raise ConfigError(f"RF-chain count ({n_rf_t}, {n_rf_r}) exceeds the array size ({self.m_t}, {self.m_r})")
        try:
            self.design_config()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def rf_points(self) -> list:
        if self.n_rf_list:
            return [(n, n) for n in self.n_rf_list]
        return [(self.n_rf_t, self.n_rf_r)]

    @property
    def sweep_variable(self) -> str:
        if len(self.snr_db_list) > 1:
            return "snr_db"
        if len(self.n_rf_list) > 1:
            return "n_rf"
        return "snr_db" if self.sweep == "snr" else "n_rf"

    def design_config(self) -> DesignConfig:
        gp = GpConfig(self.gp_eps_threshold, self.gp_max_iterations)
        outer = FactorizeConfig(self.outer_eps_threshold, self.outer_max_iterations, gp)
        return DesignConfig(outer, self.passes, self.second_stage_channel)

    def replace(self, **changes) -> "SystemConfig":
        try:
            return dataclasses.replace(self, **changes)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    def to_dict(self) -> dict:
        out = {}
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            out[f.name] = list(v) if isinstance(v, tuple) else v
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "SystemConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
        try:
            return cls(**data)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from None


def load_config(path, **overrides) -> SystemConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    data.update({k: v for k, v in overrides.items() if v is not None})
    return SystemConfig.from_dict(data)

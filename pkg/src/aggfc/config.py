"""Experiment configuration: a single JSON file determines a full run.

Schema (all keys optional unless noted)::

    {
      "d": 3, "T": 1024, "replications": 100, "base_seed": 0,
      "innovations": {"family": "gaussian" | "student-t" | "uniform", "nu": 5.0},
      "beta_0": 0.5,            // may be the string "inf"
      "c_mu": 0.5, "eps": 1.0, "clip": 8.0,
      "strategies": [1, 2],
      "eta": {"mode": "adaptive" | "corollary" | "manual",
              "value": 0.05,    // manual only
              "p": 4.0,         // moment order for the heavy-tail case
              "constants": {"A_star": ..., "L_star": ..., ...}},  // corollary only
      "paths": {"source": "synthesized" | "file",
                "file": "params.csv",
                "seed": 0, "gamma": 0.9, "n_harmonics": 3,
                "grid_points": 1024, "sigma": 1.0},
      "jobs": 1,
      "debug_checks": false,
      "export_weights": false
    }

Validation happens before any computation and raises :class:`ConfigError`
with the offending key path in the message.
"""

import json
import math
from dataclasses import dataclass, field, replace

from .aggregation import ModelConstants
from .tvar import InnovationSpec

__all__ = ["ConfigError", "ExperimentConfig", "load_config", "config_from_dict"]


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    d: int = 3
    T: int = 1024
    replications: int = 100
    base_seed: int = 0
    innovations: InnovationSpec = field(default_factory=InnovationSpec)
    beta_0: float = 0.5
    c_mu: float = 0.5
    eps: float = 1.0
    clip: float = 8.0
    strategies: tuple = (1, 2)
    eta_mode: str = "adaptive"
    eta_value: float | None = None
    moment_p: float = 4.0
    constants: ModelConstants | None = None
    path_source: str = "synthesized"
    path_file: str | None = None
    path_seed: int = 0
    gamma: float = 0.9
    n_harmonics: int = 3
    grid_points: int = 1024
    sigma_scale: float = 1.0
    jobs: int = 1
    debug_checks: bool = False
    export_weights: bool = False

    def __post_init__(self):
        if self.replications < 1:
            raise ConfigError("replications must be at least 1")
        if self.d < 1:
            raise ConfigError("d must be at least 1")
        if self.T < 2 * self.d:
            raise ConfigError(f"T must be at least 2*d = {2 * self.d}")
        if not self.beta_0 > 0:
            raise ConfigError("beta_0 must be positive (possibly infinite)")
        if not self.strategies or any(s not in (1, 2) for s in self.strategies):
            raise ConfigError("strategies must be a non-empty subset of [1, 2]")
        if self.eta_mode not in ("adaptive", "corollary", "manual"):
            raise ConfigError("eta.mode must be one of adaptive, corollary, manual")
        if self.eta_mode == "manual" and (self.eta_value is None or not self.eta_value > 0):
            raise ConfigError("eta.value must be a positive number in manual mode")
        if not self.moment_p > 2:
            raise ConfigError("eta.p must exceed 2")
        if self.path_source not in ("synthesized", "file"):
            raise ConfigError("paths.source must be synthesized or file")
        if self.path_source == "file" and not self.path_file:
            raise ConfigError("paths.file is required when paths.source is file")
        if self.path_source == "synthesized" and not 0.0 <= self.gamma < 1.0:
            raise ConfigError("paths.gamma must lie in [0, 1)")
        if self.jobs < 1:
            raise ConfigError("jobs must be at least 1")

    def with_overrides(self, **kwargs) -> "ExperimentConfig":
        """Copy with non-None keyword overrides applied (CLI flags)."""
        updates = {k: v for k, v in kwargs.items() if v is not None}
        return replace(self, **updates) if updates else self


def _get(data, key, types, default, where):
    value = data.get(key, default)
    if value is default:
        return value
    if not isinstance(value, types):
        names = "/".join(t.__name__ for t in (types if isinstance(types, tuple) else (types,)))
        raise ConfigError(f"{where}.{key} must be of type {names}")
    return value


def config_from_dict(data: dict) -> ExperimentConfig:
    """Build and validate an :class:`ExperimentConfig` from parsed JSON."""
    if not isinstance(data, dict):
        raise ConfigError("top-level config must be a JSON object")

    innov_raw = _get(data, "innovations", dict, {}, "config")
    try:
        innovations = InnovationSpec(
            family=_get(innov_raw, "family", str, "gaussian", "innovations"),
            nu=float(_get(innov_raw, "nu", (int, float), 5.0, "innovations")),
        )
    except ValueError as exc:
        raise ConfigError(f"innovations: {exc}") from exc

    beta_0 = data.get("beta_0", 0.5)
    if isinstance(beta_0, str):
        if beta_0.lower() not in ("inf", "infinity"):
            raise ConfigError("beta_0 must be a number or the string 'inf'")
        beta_0 = math.inf
    elif not isinstance(beta_0, (int, float)):
        raise ConfigError("beta_0 must be a number or the string 'inf'")

    eta_raw = _get(data, "eta", dict, {}, "config")
    constants = None
    constants_raw = eta_raw.get("constants")
    if constants_raw is not None:
        if not isinstance(constants_raw, dict):
            raise ConfigError("eta.constants must be an object")
        try:
            constants = ModelConstants(**{k: float(v) for k, v in constants_raw.items()})
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"eta.constants: {exc}") from exc

    paths_raw = _get(data, "paths", dict, {}, "config")

    strategies = data.get("strategies", [1, 2])
    if not isinstance(strategies, (list, tuple)):
        raise ConfigError("strategies must be a list")

    try:
        return ExperimentConfig(
            d=int(_get(data, "d", int, 3, "config")),
            T=int(_get(data, "T", int, 1024, "config")),
            replications=int(_get(data, "replications", int, 100, "config")),
            base_seed=int(_get(data, "base_seed", int, 0, "config")),
            innovations=innovations,
            beta_0=float(beta_0),
            c_mu=float(_get(data, "c_mu", (int, float), 0.5, "config")),
            eps=float(_get(data, "eps", (int, float), 1.0, "config")),
            clip=float(_get(data, "clip", (int, float), 8.0, "config")),
            strategies=tuple(int(s) for s in strategies),
            eta_mode=_get(eta_raw, "mode", str, "adaptive", "eta"),
            eta_value=(
                float(eta_raw["value"]) if eta_raw.get("value") is not None else None
            ),
            moment_p=float(_get(eta_raw, "p", (int, float), 4.0, "eta")),
            constants=constants,
            path_source=_get(paths_raw, "source", str, "synthesized", "paths"),
            path_file=_get(paths_raw, "file", str, None, "paths"),
            path_seed=int(_get(paths_raw, "seed", int, 0, "paths")),
            gamma=float(_get(paths_raw, "gamma", (int, float), 0.9, "paths")),
            n_harmonics=int(_get(paths_raw, "n_harmonics", int, 3, "paths")),
            grid_points=int(_get(paths_raw, "grid_points", int, 1024, "paths")),
            sigma_scale=float(_get(paths_raw, "sigma", (int, float), 1.0, "paths")),
            jobs=int(_get(data, "jobs", int, 1, "config")),
            debug_checks=bool(data.get("debug_checks", False)),
            export_weights=bool(data.get("export_weights", False)),
        )
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> ExperimentConfig:
    """Parse and validate a JSON config file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from exc
    return config_from_dict(data)

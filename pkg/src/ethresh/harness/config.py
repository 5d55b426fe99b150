"""Flat key-value scenario configuration with strict validation."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

THREADS_ENV = "ETHRESH_THREADS"

SCENARIOS = ("gaussian", "universal-inference", "gamma", "ebh")

_COMMON = {"scenario": None, "replications": 10_000, "seed": 20240101, "alpha": [0.05], "threads": None}

_DEFAULTS: dict[str, dict[str, Any]] = {
    "gaussian": {
        "data_mu": 0.3,
        "test_mus": [0.2, 0.3, 0.4],
        "thresholds": ["E0", "U", "LUS", "LN"],
        "n_grid": [10, 50, 100, 500],
        "betas": [0.5, 0.9, 0.95, 0.99],
        "n_max": None,
    },
    "universal-inference": {
        "alpha": [0.1],
        "signals": [0.0, 0.25, 0.5, 0.75, 1.0],
        "thresholds": ["E0", "D", "LDGT0"],
        "n_fit": 200,
        "n_eval": 200,
        "model": "full-five-param",
    },
    "gamma": {
        "alpha": [0.01, 0.05],
        "shape0": 1.0,
        "rate0": 1.0,
        "regions": ["theta1", "theta2", "theta3"],
        "n_grid": list(range(2, 51)),
        "alt_shape": 1.1,
        "alt_rate": 0.9,
        "power_region": "theta2",
        "power_n_grid": [50, 100, 200, 500],
    },
    "ebh": {
        "replications": 1000,
        "alpha": [0.01, 0.02, 0.05, 0.1],
        "K": 1000,
        "K0": 500,
        "signal_b": [3.0, 4.0, 5.0],
        "correlation": None,
    },
}


class ConfigError(ValueError):
    pass


def default_threads() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return n


@dataclass
class ScenarioConfig:
    scenario: str
    replications: int
    seed: int
    alpha: list
    threads: int
    params: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.params[key]

    def to_dict(self) -> dict:
        return {"scenario": self.scenario, "replications": self.replications, "seed": self.seed,
                "alpha": list(self.alpha), "threads": self.threads, **self.params}


def _num_list(name, value, *, integer=False):
    if not isinstance(value, list) or not value:
        raise ConfigError(f"{name} must be a nonempty list")
    out = []
    for v in value:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"{name} entries must be numbers, got {v!r}")
        if integer and (not float(v).is_integer()):
            raise ConfigError(f"{name} entries must be integers, got {v!r}")
        out.append(int(v) if integer else float(v))
    return out


def _pos_int(name, value, minimum=1):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not float(value).is_integer():
        raise ConfigError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise ConfigError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def _pos_float(name, value, strict=True):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{name} must be a number, got {value!r}")
    if value < 0 or (strict and value == 0):
        raise ConfigError(f"{name} must be {'positive' if strict else 'nonnegative'}, got {value}")
    return float(value)


def _num(name, value):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{name} must be a number, got {value!r}")
    return float(value)


def _str_list(name, value):
    if not isinstance(value, list) or not value or not all(isinstance(v, str) for v in value):
        raise ConfigError(f"{name} must be a nonempty list of strings")
    return list(value)


def build_config(raw: dict, *, seed: int | None = None, threads: int | None = None) -> ScenarioConfig:
    """Merge ``raw`` onto the scenario defaults and validate."""
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    scenario = raw.get("scenario")
    if scenario not in SCENARIOS:
        raise ConfigError(f"scenario must be one of {', '.join(SCENARIOS)}, got {scenario!r}")
    merged = {**_COMMON, **_DEFAULTS[scenario]}
    unknown = sorted(set(raw) - set(merged))
    if unknown:
        raise ConfigError(f"unknown config key(s) for {scenario}: {', '.join(unknown)}")
    merged.update(raw)
    if seed is not None:
        merged["seed"] = seed
    if threads is not None:
        merged["threads"] = threads

    reps = _pos_int("replications", merged.pop("replications"))
    s = merged.pop("seed")
    if isinstance(s, bool) or not isinstance(s, int) or not (0 <= s < 2**64):
        raise ConfigError(f"seed must be an unsigned 64-bit integer, got {s!r}")
    alphas = _num_list("alpha", merged.pop("alpha"))
    if any(not (0 < a < 1) for a in alphas):
        raise ConfigError("alpha values must lie in (0, 1)")
    th = merged.pop("threads")
    th = default_threads() if th is None else _pos_int("threads", th)
    merged.pop("scenario")
    params = _validate_params(scenario, merged)
    return ScenarioConfig(scenario, reps, s, alphas, th, params)


def _validate_params(scenario, p):
    from ..thresholds import EClass

    def classes(name):
        try:
            return [EClass.parse(c).value for c in _str_list(name, p[name])]
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    if scenario == "gaussian":
        p["data_mu"] = _num("data_mu", p["data_mu"])
        p["test_mus"] = _num_list("test_mus", p["test_mus"])
        p["thresholds"] = classes("thresholds")
        p["n_grid"] = _num_list("n_grid", p["n_grid"], integer=True)
        if min(p["n_grid"]) < 1:
            raise ConfigError("n_grid entries must be >= 1")
        p["betas"] = [] if p["betas"] == [] else _num_list("betas", p["betas"])
        if any(not (0 < b < 1) for b in p["betas"]):
            raise ConfigError("betas must lie in (0, 1)")
        p["n_max"] = max(p["n_grid"]) if p["n_max"] is None else _pos_int("n_max", p["n_max"])
        if p["n_max"] < max(p["n_grid"]):
            raise ConfigError("n_max must cover the n_grid")
    elif scenario == "universal-inference":
        p["signals"] = _num_list("signals", p["signals"])
        p["thresholds"] = classes("thresholds")
        p["n_fit"] = _pos_int("n_fit", p["n_fit"], minimum=4)
        p["n_eval"] = _pos_int("n_eval", p["n_eval"])
        from ..models import MIXTURE_MODELS
        if p["model"] not in MIXTURE_MODELS:
            raise ConfigError(f"model must be one of {', '.join(MIXTURE_MODELS)}")
    elif scenario == "gamma":
        for k in ("shape0", "rate0", "alt_shape", "alt_rate"):
            p[k] = _pos_float(k, p[k])
        p["regions"] = _str_list("regions", p["regions"])
        p["n_grid"] = _num_list("n_grid", p["n_grid"], integer=True)
        p["power_n_grid"] = [] if p["power_n_grid"] == [] else _num_list("power_n_grid", p["power_n_grid"], integer=True)
        if min(p["n_grid"] + p["power_n_grid"]) < 2:
            raise ConfigError("gamma sample sizes must be >= 2")
        from ..models import GammaRegion
        try:
            for r in p["regions"] + [p["power_region"]]:
                GammaRegion(r)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    elif scenario == "ebh":
        p["K"] = _pos_int("K", p["K"], minimum=2)
        p["K0"] = _pos_int("K0", p["K0"], minimum=0)
        if p["K0"] > p["K"]:
            raise ConfigError("K0 cannot exceed K")
        p["signal_b"] = _num_list("signal_b", p["signal_b"])
        if any(b < 0 for b in p["signal_b"]):
            raise ConfigError("signal_b must be nonnegative")
        lo = -1.0 / (p["K"] - 1)
        if p["correlation"] is None:
            p["correlation"] = lo
        rho = _num("correlation", p["correlation"])
        if not (lo - 1e-15 <= rho < 1):
            raise ConfigError(f"correlation must lie in [-1/(K-1), 1), got {rho}")
        p["correlation"] = max(rho, lo)
    return p


def load_config(path: str | Path, **overrides) -> ScenarioConfig:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    return build_config(raw, **overrides)

"""TOML experiment configuration with documented defaults and strict key checking."""
from __future__ import annotations

import copy
import hashlib
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from ..errors import ConfigError

__all__ = ["DEFAULTS", "ExperimentConfig", "load_config", "parse_override"]

# Every accepted key with its default.  Sections mirror the TOML tables.
DEFAULTS: dict[str, dict[str, Any]] = {
    "model": {
        "b": 0.2,
        "c": 0.0,
        "d": 0.018,
        # a number, or one of "critical", "critical-eps2", "critical+eps2"
        "a": "critical-eps2",
        "branch": "minus",
    },
    "grid": {
        "M": 64,  # carrier wavelengths on the fast domain
        "n": 4096,
        "n_slow": 256,
        "eigvec": "sideband",
    },
    "integrator": {
        "scheme": "etdrk4",
        "dt": "auto",
        "dt_max": 0.05,
        "gl_steps_per_checkpoint": 40,
        "T0": 1.0,
        "checkpoints": 32,
    },
    "sweep": {
        "epsilons": [0.04, 0.06, 0.08, 0.1],
        "r": 2.0,
        "A0": 0.5,
        "modulation": 0.1,
        "C_GL": 2.0,
        "max_retries": 4,
        "residual_times": [0.0, 0.25, 0.5],
        "slope_min": 1.7,
        "slope_max": 2.3,
        "res_c_slope_min": 2.7,
        "res_s_slope_min": 1.7,
    },
    "saturation": {
        "eps": 0.05,
        "side": "unstable",
        "A0": 0.5,
        "T_end": 3.0,
        "sample_dT": 0.01,
        "fit_cap": 2.0,
        "M": 16,
        "n": 512,
        "n_slow": 16,
        "tolerance": 0.15,
    },
    "dispersion": {
        "eps2": 0.02,
        "k_min": -4.0,
        "k_max": 4.0,
        "samples": 400,
    },
    "simulate": {
        "eps": 0.1,
        "T_end": 1.0,
        "initial": "ansatz",
        "noise": 1e-3,
        "records": 32,
    },
    "run": {
        "seed": 20240917,
        "output": "-",
    },
}

_ALLOWED_A = ("critical", "critical-eps2", "critical+eps2")
_CHOICES = {
    ("model", "branch"): ("minus", "plus", "desert"),
    ("grid", "eigvec"): ("sideband", "frozen"),
    ("integrator", "scheme"): ("etdrk2", "etdrk4"),
    ("saturation", "side"): ("unstable", "stable"),
    ("simulate", "initial"): ("ansatz", "random"),
}


def _merge(base: dict, overrides: dict, origin: str) -> dict:
    out = copy.deepcopy(base)
    for section, values in overrides.items():
        if section not in DEFAULTS:
            raise ConfigError(f"{origin}: unknown section [{section}]")
        if not isinstance(values, dict):
            raise ConfigError(f"{origin}: [{section}] must be a table")
        for key, value in values.items():
            if key not in DEFAULTS[section]:
                raise ConfigError(f"{origin}: unknown key {section}.{key}")
            out[section][key] = value
    return out


def parse_override(text: str) -> dict:
    """``section.key=value`` with ``value`` in TOML syntax (bare words are strings)."""
    if "=" not in text or "." not in text.split("=", 1)[0]:
        raise ConfigError(f"override {text!r} is not of the form section.key=value")
    lhs, rhs = text.split("=", 1)
    section, key = lhs.strip().split(".", 1)
    try:
        value = tomllib.loads(f"v = {rhs.strip()}")["v"]
    except tomllib.TOMLDecodeError:
        value = rhs.strip()
    return {section: {key: value}}


def _number(section, key, value, positive=False, integer=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{section}.{key} must be a number, got {value!r}")
    if integer and int(value) != value:
        raise ConfigError(f"{section}.{key} must be an integer, got {value!r}")
    if positive and not value > 0:
        raise ConfigError(f"{section}.{key} must be positive, got {value!r}")
    return int(value) if integer else float(value)


def _validate(cfg: dict) -> dict:
    for (section, key), choices in _CHOICES.items():
        value = str(cfg[section][key]).lower().replace("-", "").replace("_", "") if key == "scheme" else cfg[section][key]
        if value not in choices:
            raise ConfigError(f"{section}.{key} must be one of {choices}, got {cfg[section][key]!r}")
        cfg[section][key] = value
    m = cfg["model"]
    for key in ("b", "c"):
        m[key] = _number("model", key, m[key])
    m["d"] = _number("model", "d", m["d"], positive=True)
    if m["b"] < 0:
        raise ConfigError("model.b must be non-negative")
    if isinstance(m["a"], str):
        if m["a"] not in _ALLOWED_A:
            raise ConfigError(f"model.a must be a number or one of {_ALLOWED_A}")
    else:
        m["a"] = _number("model", "a", m["a"])
        if m["a"] < 0:
            raise ConfigError("model.a must be non-negative")
    for section in ("grid", "saturation"):
        s = cfg[section]
        for key in ("M", "n", "n_slow"):
            s[key] = _number(section, key, s[key], positive=True, integer=True)
        if s["n"] < 16 or s["n"] & (s["n"] - 1) or s["n_slow"] < 16 or s["n_slow"] & (s["n_slow"] - 1):
            raise ConfigError(f"{section}.n and {section}.n_slow must be powers of two >= 16")
    it = cfg["integrator"]
    if it["dt"] != "auto":
        it["dt"] = _number("integrator", "dt", it["dt"], positive=True)
    it["dt_max"] = _number("integrator", "dt_max", it["dt_max"], positive=True)
    it["T0"] = _number("integrator", "T0", it["T0"], positive=True)
    for key in ("checkpoints", "gl_steps_per_checkpoint"):
        it[key] = _number("integrator", key, it[key], positive=True, integer=True)
    sw = cfg["sweep"]
    eps = sw["epsilons"]
    if not isinstance(eps, list) or not eps:
        raise ConfigError("sweep.epsilons must be a non-empty list")
    sw["epsilons"] = sorted(_number("sweep", "epsilons", e, positive=True) for e in eps)
    if len(set(sw["epsilons"])) != len(sw["epsilons"]):
        raise ConfigError("sweep.epsilons contains duplicates")
    sw["residual_times"] = [_number("sweep", "residual_times", t) for t in sw["residual_times"]]
    for key in ("r", "A0", "modulation", "slope_min", "slope_max", "res_c_slope_min", "res_s_slope_min"):
        sw[key] = _number("sweep", key, sw[key])
    if sw["r"] < 0:
        raise ConfigError("sweep.r must be non-negative")
    sw["C_GL"] = _number("sweep", "C_GL", sw["C_GL"], positive=True)
    sw["max_retries"] = _number("sweep", "max_retries", sw["max_retries"], integer=True)
    sa = cfg["saturation"]
    for key in ("eps", "T_end", "sample_dT", "fit_cap", "tolerance"):
        sa[key] = _number("saturation", key, sa[key], positive=True)
    sa["A0"] = _number("saturation", "A0", sa["A0"], positive=True)
    di = cfg["dispersion"]
    for key in ("eps2", "k_min", "k_max"):
        di[key] = _number("dispersion", key, di[key])
    di["samples"] = _number("dispersion", "samples", di["samples"], positive=True, integer=True)
    if not di["k_max"] > di["k_min"]:
        raise ConfigError("dispersion.k_max must exceed dispersion.k_min")
    si = cfg["simulate"]
    for key in ("eps", "T_end"):
        si[key] = _number("simulate", key, si[key], positive=True)
    si["noise"] = _number("simulate", "noise", si["noise"])
    si["records"] = _number("simulate", "records", si["records"], positive=True, integer=True)
    cfg["run"]["seed"] = _number("run", "seed", cfg["run"]["seed"], integer=True)
    cfg["run"]["output"] = str(cfg["run"]["output"])
    return cfg


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated configuration; ``data`` maps section -> key -> value."""

    data: dict

    def __getitem__(self, section: str) -> dict:
        return self.data[section]

    @property
    def sha256(self) -> str:
        blob = json.dumps(self.data, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    @classmethod
    def from_dict(cls, overrides: dict | None = None, origin: str = "<dict>") -> "ExperimentConfig":
        return cls(_validate(_merge(DEFAULTS, overrides or {}, origin)))

    def updated(self, overrides: dict) -> "ExperimentConfig":
        return ExperimentConfig(_validate(_merge(self.data, overrides, "<override>")))


def load_config(path: str | Path | None = None, overrides: list[str] = ()) -> ExperimentConfig:
    data: dict = {}
    origin = "<defaults>"
    if path is not None:
        origin = str(path)
        try:
            with open(path, "rb") as fh:
                data = tomllib.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    merged = _merge(DEFAULTS, data, origin)
    for text in overrides:
        merged = _merge(merged, parse_override(text), "--set")
    return ExperimentConfig(_validate(merged))

"""Run configuration: one JSON document describing system, targets, horizons, sweeps.

Physical defaults (beam with c = l = d = 1) are embedded here and every field
can be overridden by the file or by command-line flags.  A short hash of the
canonical document is stamped into every output file so results can be traced
back to their configuration.
"""

from __future__ import annotations

import copy
import hashlib
import json

import numpy as np

from . import beam
from .exceptions import ConfigError
from .lq import HorizonSpec
from .model import OscillatorSystem, StateVector
from .static_opt import TargetSpec

DEFAULTS = {
    "system": {"N": 50, "omega": None, "b": None,
               "generator": {"kind": "beam", "c": 1.0, "l": 1.0, "d": 1.0}},
    "target": {"xbar_xi": None, "xbar_eta": None, "ubar": 1.0},
    "horizon": {"T": 20.0, "x0_xi": None, "x0_eta": None, "samples": 2001},
    "beta": [0.4],
    "rho": 1.4,
    "alpha": 0.5,
    "kappa": 0.5,
    "seed": 0,
    "sweep": {"n_values": [10, 20, 40], "t_values": [20.0, 40.0, 80.0]},
    "fit_window": [2.0, 10.0],
    "thresholds": {
        "envelope_ratio_max": 2.0,
        "shooting_variation_max": 0.25,
        "oracle_rel_tol": 1e-6,
    },
    "oracle_check": {"enabled": True, "n": 4, "T": 10.0, "samples": 2001},
    "tolerances": {"newton": 1e-12, "ivp_rtol": 1e-9, "residual_max": 1e-10},
}


def _merge_into(base: dict, overrides: dict, path: str):
    for key, value in overrides.items():
        if key not in base:
            raise ConfigError(f"unknown configuration field {path}{key}")
        if isinstance(base[key], dict) and isinstance(value, dict):
            _merge_into(base[key], value, f"{path}{key}.")
        else:
            base[key] = value


def merge_config(overrides: dict | None) -> dict:
    """Defaults overlaid with a (possibly partial) document; unknown keys rejected."""
    cfg = copy.deepcopy(DEFAULTS)
    if not overrides:
        return cfg
    if not isinstance(overrides, dict):
        raise ConfigError("configuration document must be a JSON object")
    _merge_into(cfg, overrides, "")
    return cfg


def load_config(path) -> dict:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read configuration {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
    return merge_config(doc)


def config_hash(cfg: dict) -> str:
    """Stable 12-hex-digit digest of the canonical document."""
    canonical = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()[:12]


def system_from_config(cfg: dict, n_override: int | None = None) -> OscillatorSystem:
    """Build the oscillator chain: explicit arrays or the beam generator."""
    sys_cfg = cfg["system"]
    n = int(n_override or sys_cfg.get("N") or 0)
    if "omega" in sys_cfg and sys_cfg["omega"] is not None:
        omega = np.asarray(sys_cfg["omega"], dtype=float)
        if "b" not in sys_cfg or sys_cfg["b"] is None:
            raise ConfigError("field system.b is required with explicit frequencies")
        b = np.asarray(sys_cfg["b"], dtype=float)
        if n and n != omega.size:
            raise ConfigError(f"system.N = {n} does not match {omega.size} frequencies")
        try:
            system = OscillatorSystem(omega, b)
        except ValueError as exc:
            raise ConfigError(f"invalid system arrays: {exc}") from exc
    else:
        gen = sys_cfg.get("generator")
        if not gen:
            raise ConfigError("field system.omega or system.generator is required")
        if gen.get("kind") != "beam":
            raise ConfigError(f"unknown generator kind {gen.get('kind')!r}")
        if n < 1:
            raise ConfigError("field system.N is required with a generator")
        params = beam.BeamParams(c=float(gen.get("c", 1.0)), l=float(gen.get("l", 1.0)),
                                 d=float(gen.get("d", 1.0)))
        system = beam.build_system(n, params)
    if np.any(system.b == 0.0):
        bad = 1 + int(np.flatnonzero(system.b == 0.0)[0])
        raise ConfigError(f"zero gain b_{bad}: nonzero-gain requirement (A1) violated")
    return system


def _state_from_fields(cfg_block: dict, prefix: str, n: int,
                       truncate: bool = False) -> StateVector:
    xi = cfg_block.get(f"{prefix}_xi")
    eta = cfg_block.get(f"{prefix}_eta")
    xi = np.zeros(n) if xi is None else np.asarray(xi, dtype=float)
    eta = np.zeros(n) if eta is None else np.asarray(eta, dtype=float)
    if truncate and xi.size >= n and eta.size >= n:
        xi, eta = xi[:n], eta[:n]
    if xi.size != n:
        raise ConfigError(f"field {prefix}_xi must have length {n}, got {xi.size}")
    if eta.size != n:
        raise ConfigError(f"field {prefix}_eta must have length {n}, got {eta.size}")
    return StateVector(xi, eta)


def target_from_config(cfg: dict, n: int, truncate: bool = False) -> TargetSpec:
    tgt = cfg["target"]
    if "ubar" not in tgt or tgt["ubar"] is None:
        raise ConfigError("field target.ubar is required")
    return TargetSpec(xbar=_state_from_fields(tgt, "xbar", n, truncate),
                      ubar=float(tgt["ubar"]))


def horizon_from_config(cfg: dict, n: int, t_override: float | None = None,
                        truncate: bool = False) -> HorizonSpec:
    hz = cfg["horizon"]
    T = float(t_override or hz["T"])
    return HorizonSpec(T=T, x0=_state_from_fields(hz, "x0", n, truncate),
                       samples=int(hz.get("samples", 2001)))

# kw_graph/config.py
from __future__ import annotations

from importlib import resources
from typing import Any, Dict, Optional

import yaml

from .exceptions import InvalidOptions

DEFAULT: Dict[str, Any] = {
    "tol_residual": 1e-10,
    "degeneracy_tol": 1e-8,
    "stability_tol": 1e-8,
    "overflow_guard": 700.0,
    "max_iters": 100,
    "damping": 0.5,
    "armijo": 1e-4,
    "n_starts": 48,
    "rng_seed": 0,
    "dedupe_distance": 1e-6,
    "start_box_radius": None,
    "escalate": 3,
    "bracket_tol": 1e-3,
    "sweep_waypoints": 16,
    "a_grid_points": 32,
    "a_grid_min": 1e-4,
    "a_grid_max": 1.0,
    "lp_vertex_limit": 50,
    "family_growth": 3.0,
}

# module-level tolerances; overridden by apply()
TOL_RESIDUAL = DEFAULT["tol_residual"]
DEGENERACY_TOL = DEFAULT["degeneracy_tol"]
STABILITY_TOL = DEFAULT["stability_tol"]
OVERFLOW_GUARD = DEFAULT["overflow_guard"]

# every key of the last applied config
ACTIVE: Dict[str, Any] = dict(DEFAULT)


def _read_yaml(fp) -> Dict[str, Any]:
    data = yaml.safe_load(fp) or {}
    if not isinstance(data, dict):
        raise InvalidOptions("config file must hold a mapping")
    unknown = sorted(set(data) - set(DEFAULT))
    if unknown:
        raise InvalidOptions(f"unknown config keys: {', '.join(unknown)}")
    return data


def load(path: Optional[str] = None) -> Dict[str, Any]:
    """Packaged default.yaml, then the user file on top."""
    with resources.files("kw_graph").joinpath("config/default.yaml").open("r", encoding="utf-8") as f:
        cfg = {**DEFAULT, **_read_yaml(f)}
    if path:
        with open(path, "r", encoding="utf-8") as f:
            cfg.update(_read_yaml(f))
    return cfg


def apply(cfg: Dict[str, Any]) -> None:
    """Install ``cfg`` as the module defaults (tolerances and ACTIVE)."""
    global TOL_RESIDUAL, DEGENERACY_TOL, STABILITY_TOL, OVERFLOW_GUARD
    TOL_RESIDUAL = float(cfg.get("tol_residual", TOL_RESIDUAL))
    DEGENERACY_TOL = float(cfg.get("degeneracy_tol", DEGENERACY_TOL))
    STABILITY_TOL = float(cfg.get("stability_tol", STABILITY_TOL))
    OVERFLOW_GUARD = float(cfg.get("overflow_guard", OVERFLOW_GUARD))
    ACTIVE.update(cfg)

"""Runtime settings: tracked defaults from config/runtime.yaml, env overrides from .env."""

import os
from pathlib import Path
from typing import Any, Dict

import yaml
from dotenv import load_dotenv

from favard.exceptions import ConfigurationError

BASE_DIR = Path(__file__).resolve().parent.parent
load_dotenv(encoding='utf-8')

_FORMATS = ("json", "csv")

_DEFAULT_TOLERANCES = {
    "coefficient_trim": 1.0e-12,
    "degenerate_gap": 1.0e-10,
    "complex_part": 1.0e-9,
    "reassembly": 1.0e-10,
    "mass_agreement": 1.0e-9,
    "charpoly_identity": 1.0e-8,
    "cross_check": 1.0e-8,
    "identity_residual": 1.0e-7,
    "kernel_identity": 1.0e-9,
    "darboux_charpoly": 1.0e-9,
    "weyl_routes": 1.0e-7,
    "gauss_borel": 1.0e-7,
    "quadrature_exact": 1.0e-8,
    "optimality_gap": 1.0e-4,
    "pole_proximity": 1.0e-12,
    "contour": 1.0e-7,
}


def _runtime_yaml_path() -> Path:
    override = os.getenv("FAVARD_RUNTIME_YAML")
    if override:
        return Path(override)
    return BASE_DIR / "config" / "runtime.yaml"


def _read_runtime_yaml() -> dict:
    p = _runtime_yaml_path()
    if p.exists():
        with p.open("r", encoding="utf-8") as fh:
            data = yaml.safe_load(fh) or {}
            if isinstance(data, dict):
                return data
    return {}


def _positive_floats(section: Dict[str, Any], name: str) -> Dict[str, float]:
    out = {}
    for key, value in section.items():
        try:
            number = float(value)
        except (TypeError, ValueError):
            raise ConfigurationError(f"{name}.{key}", f"not a number: {value!r}")
        if not number > 0:
            raise ConfigurationError(f"{name}.{key}", "must be positive")
        out[key] = number
    return out


def load_settings() -> dict:
    rt = _read_runtime_yaml()

    tolerances_cfg = rt.get("tolerances") or {}
    shift_cfg = rt.get("shift_search") or {}
    verify_cfg = rt.get("verify") or {}
    report_cfg = rt.get("report") or {}
    logging_cfg = rt.get("logging") or {}

    report_format = (os.getenv("FAVARD_FORMAT") or report_cfg.get("format") or "json").strip().lower()
    if report_format not in _FORMATS:
        raise ConfigurationError("report.format", f"expected one of {_FORMATS}, got {report_format!r}")

    seed_raw = os.getenv("FAVARD_SEED") or verify_cfg.get("seed", 0)
    try:
        seed = int(seed_raw)
    except (TypeError, ValueError):
        raise ConfigurationError("verify.seed", f"not an integer: {seed_raw!r}")

    settings = {
        "TOLERANCES": {**_DEFAULT_TOLERANCES, **_positive_floats(tolerances_cfg, "tolerances")},
        "SHIFT_RESOLUTION_FACTOR": float(shift_cfg.get("resolution_factor", 1.0e-6)),
        "SHIFT_CEILING_FACTOR": float(shift_cfg.get("ceiling_factor", 10.0)),
        # allow env to override runtime.yaml
        "SEED": seed,
        "ENSEMBLE_SIZE": int(verify_cfg.get("ensemble_size", 5)),
        "FACTOR_RANGE": (
            float(verify_cfg.get("factor_low", 0.2)),
            float(verify_cfg.get("factor_high", 2.0)),
        ),
        "POINT_PAIRS": int(verify_cfg.get("point_pairs", 20)),
        "GRID_POINTS": int(verify_cfg.get("grid_points", 100)),
        "MAX_POWER": int(verify_cfg.get("max_power", 10)),
        "REPORT_FORMAT": report_format,
        "FLOAT_DIGITS": int(report_cfg.get("float_digits", 17)),
        "LOG_LEVEL": (os.getenv("FAVARD_LOG_LEVEL") or logging_cfg.get("level") or "WARNING").upper(),
    }
    return settings


settings = load_settings()


def get_tolerance(name: str) -> float:
    """Look up a named tolerance from the runtime settings."""
    try:
        return settings["TOLERANCES"][name]
    except KeyError:
        raise ConfigurationError(f"tolerances.{name}", "unknown tolerance")

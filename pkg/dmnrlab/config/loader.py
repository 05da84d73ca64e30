"""
Flat key-value configuration.

    # comment
    K = 10
    k1 = 0.015
    height_mode = fixed
    noise_ids = 110, 111

Defaults < config file < explicit overrides (command-line flags).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, Mapping, Optional, Tuple

from dmnrlab.config.defaults import (
    BASELINE_DEFAULTS,
    DMNR_DEFAULTS,
    HDBSCAN_DEFAULTS,
    IO_DEFAULTS,
)
from dmnrlab.kernel.errors import ConfigError, DmnrLabError
from dmnrlab.math.structs import DmnrParams, HdbscanParams, HeightMode

logger = logging.getLogger(__name__)


def parse_id_list(text) -> Tuple[int, ...]:
    if isinstance(text, (tuple, list)):
        return tuple(int(v) for v in text)
    items = [t for t in str(text).replace(";", ",").replace(" ", ",").split(",") if t]
    try:
        return tuple(int(t, 0) for t in items)
    except ValueError:
        raise ConfigError(f"noise_ids must be integers, got '{text}'")


def _choice(*options: str) -> Callable[[Any], str]:
    def conv(v):
        s = str(v).strip().lower()
        if s not in options:
            raise ValueError(f"expected one of {options}")
        return s
    return conv


# Type of every recognised key.
SCHEMA: Dict[str, Callable[[Any], Any]] = {
    "K": int,
    "k1": float,
    "k2": float,
    "k3": float,
    "h": int,
    "height_mode": _choice("adaptive", "fixed"),
    "h1": float,
    "h2": float,
    "rescue_rank": _choice("count", "fraction"),
    "min_cluster_size": int,
    "min_samples": int,
    "noise_ids": parse_id_list,
    "intensity_scale": float,
    "sor_k": int,
    "sor_alpha": float,
    "ror_radius": float,
    "ror_min_neighbors": int,
    "dror_alpha_deg": float,
    "dror_beta": float,
    "dror_min_radius": float,
    "dror_min_neighbors": int,
}


def read_key_values(path) -> Dict[str, str]:
    """Raw ``key = value`` pairs, in file order. Later keys win."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    out: Dict[str, str] = {}
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" in line:
            key, value = line.split("=", 1)
        elif ":" in line:
            key, value = line.split(":", 1)
        else:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = key.strip(), value.strip()
        if not key:
            raise ConfigError(f"{path}:{lineno}: empty key")
        out[key] = value
    return out


def coerce(values: Mapping[str, Any], schema: Mapping[str, Callable] = SCHEMA, source: str = "config") -> Dict[str, Any]:
    out = {}
    for key, value in values.items():
        if key not in schema:
            raise ConfigError(f"{source}: unknown key '{key}'")
        try:
            out[key] = schema[key](value)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"{source}: bad value for '{key}': {value!r} ({e})")
    return out


def load_config(path) -> Dict[str, Any]:
    """Typed values from a config file (only the keys it sets)."""
    values = coerce(read_key_values(path), source=str(path))
    logger.debug("config %s: %s", path, values)
    return values


@dataclass(frozen=True)
class Settings:
    """Everything a filter run needs, resolved from defaults, file and flags."""
    dmnr: DmnrParams = field(default_factory=DmnrParams)
    hdbscan: HdbscanParams = field(default_factory=HdbscanParams)
    sor_k: int = BASELINE_DEFAULTS["sor_k"]
    sor_alpha: float = BASELINE_DEFAULTS["sor_alpha"]
    ror_radius: float = BASELINE_DEFAULTS["ror_radius"]
    ror_min_neighbors: int = BASELINE_DEFAULTS["ror_min_neighbors"]
    dror_alpha_deg: float = BASELINE_DEFAULTS["dror_alpha_deg"]
    dror_beta: float = BASELINE_DEFAULTS["dror_beta"]
    dror_min_radius: float = BASELINE_DEFAULTS["dror_min_radius"]
    dror_min_neighbors: int = BASELINE_DEFAULTS["dror_min_neighbors"]
    noise_ids: Tuple[int, ...] = IO_DEFAULTS["noise_ids"]
    intensity_scale: float = IO_DEFAULTS["intensity_scale"]

    def echo(self) -> Dict[str, Any]:
        """Flat view of every parameter, for report headers."""
        d = self.dmnr
        return {
            "K": d.K, "k1": d.k1, "k2": d.k2, "k3": d.k3, "h": d.h,
            "height_mode": d.height_mode.kind,
            "h1": d.height_mode.h1, "h2": d.height_mode.h2,
            "rescue_rank": d.rescue_rank,
            "min_cluster_size": self.hdbscan.min_cluster_size,
            "min_samples": self.hdbscan.min_samples,
            "sor_k": self.sor_k, "sor_alpha": self.sor_alpha,
            "ror_radius": self.ror_radius, "ror_min_neighbors": self.ror_min_neighbors,
            "dror_alpha_deg": self.dror_alpha_deg, "dror_beta": self.dror_beta,
            "dror_min_radius": self.dror_min_radius,
            "dror_min_neighbors": self.dror_min_neighbors,
            "noise_ids": list(self.noise_ids),
            "intensity_scale": self.intensity_scale,
        }


# Range each baseline parameter must fall in.
_BASELINE_LIMITS: Dict[str, Tuple[Callable[[Any], bool], str]] = {
    "sor_k": (lambda v: v >= 1, ">= 1"),
    "sor_alpha": (lambda v: v >= 0, ">= 0"),
    "ror_radius": (lambda v: v > 0, "> 0"),
    "dror_alpha_deg": (lambda v: v > 0, "> 0"),
    "dror_beta": (lambda v: v > 0, "> 0"),
    "dror_min_radius": (lambda v: v > 0, "> 0"),
}


def _check_baselines(values: Mapping[str, Any]) -> None:
    for key, (ok, rule) in _BASELINE_LIMITS.items():
        if not ok(values[key]):
            raise ConfigError(f"{key} must be {rule}, got {values[key]!r}")

def build_settings(
    config_path: Optional[str] = None,
    overrides: Optional[Mapping[str, Any]] = None,
) -> Settings:
    """
    s = build_settings(config_path, overrides)
    Overrides with value None are ignored.
    """
    merged: Dict[str, Any] = {}
    merged.update(DMNR_DEFAULTS)
    merged.update(HDBSCAN_DEFAULTS)
    merged.update(BASELINE_DEFAULTS)
    merged.update(IO_DEFAULTS)
    if config_path:
        merged.update(load_config(config_path))
    if overrides:
        flags = {k: v for k, v in overrides.items() if v is not None}
        merged.update(coerce(flags, source="command line"))

    try:
        if merged["height_mode"] == "fixed":
            mode = HeightMode.fixed(merged["h1"], merged["h2"])
        else:
            mode = HeightMode.adaptive()
        dmnr = DmnrParams(
            K=merged["K"], k1=merged["k1"], k2=merged["k2"], k3=merged["k3"],
            h=merged["h"], height_mode=mode, rescue_rank=merged["rescue_rank"],
        )
        hdb = HdbscanParams(
            min_cluster_size=merged["min_cluster_size"],
            min_samples=merged["min_samples"],
        )
    except DmnrLabError as e:
        raise ConfigError(str(e))
    _check_baselines(merged)

    return Settings(
        dmnr=dmnr,
        hdbscan=hdb,
        sor_k=merged["sor_k"],
        sor_alpha=merged["sor_alpha"],
        ror_radius=merged["ror_radius"],
        ror_min_neighbors=merged["ror_min_neighbors"],
        dror_alpha_deg=merged["dror_alpha_deg"],
        dror_beta=merged["dror_beta"],
        dror_min_radius=merged["dror_min_radius"],
        dror_min_neighbors=merged["dror_min_neighbors"],
        noise_ids=parse_id_list(merged["noise_ids"]),
        intensity_scale=merged["intensity_scale"],
    )

"""Flat key=value configuration handling for the detector and engine knobs."""

from __future__ import annotations

from dataclasses import replace
from pathlib import Path

from .detector import DetectorConfig
from .errors import ConfigError

# key -> (target, coercion); "generations" is accepted as an alias
_DDE_KEYS = {
    "f": float,
    "cr": float,
    "pop_size": int,
    "max_generations": int,
    "generations": int,
    "h": float,
    "transform_cap": int,
    "penalty_cost": float,
    "target_objective": lambda s: None if str(s).lower() == "none" else float(s),
    "seed": int,
}
_DETECTOR_KEYS = {
    "window": int,
    "min_radius": float,
    "max_circles": int,
    "completeness_threshold": float,
    "mask_tolerance": float,
}


def load_config_file(path: str | Path) -> dict[str, str]:
    """Parse ``key = value`` lines; blank lines and # comments are ignored."""
    mapping: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        mapping[key] = value
    return mapping


def build_detector_config(overrides: dict | None = None) -> DetectorConfig:
    """Merge overrides into the default configuration.

    Engine and detector keys share one flat namespace; unknown keys are
    rejected so typos fail loudly.
    """
    cfg = DetectorConfig()
    if not overrides:
        return cfg
    dde_kwargs = {}
    det_kwargs = {}
    for key, value in overrides.items():
        if value is None and key != "target_objective":
            continue
        if key in _DDE_KEYS:
            name = "max_generations" if key == "generations" else key
            try:
                dde_kwargs[name] = _DDE_KEYS[key](value)
            except (TypeError, ValueError):
                raise ConfigError(f"bad value for {key}: {value!r}") from None
        elif key in _DETECTOR_KEYS:
            try:
                det_kwargs[key] = _DETECTOR_KEYS[key](value)
            except (TypeError, ValueError):
                raise ConfigError(f"bad value for {key}: {value!r}") from None
        else:
            raise ConfigError(f"unknown configuration key: {key}")
    return replace(cfg, dde=replace(cfg.dde, **dde_kwargs), **det_kwargs)


def config_as_dict(cfg: DetectorConfig) -> dict:
    """Flat echo of the effective parameters, in a fixed key order."""
    return {
        "f": cfg.dde.f,
        "cr": cfg.dde.cr,
        "pop_size": cfg.dde.pop_size,
        "max_generations": cfg.dde.max_generations,
        "h": cfg.dde.h,
        "transform_cap": cfg.dde.transform_cap,
        "penalty_cost": cfg.dde.penalty_cost,
        "target_objective": cfg.dde.target_objective,
        "window": cfg.window,
        "min_radius": cfg.min_radius,
        "max_circles": cfg.max_circles,
        "completeness_threshold": cfg.completeness_threshold,
        "mask_tolerance": cfg.mask_tolerance,
    }

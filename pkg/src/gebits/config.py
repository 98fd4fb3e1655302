"""Flat `key = value` experiment configuration.

One mode per file, `#` comments, no sections.  Unknown keys are rejected by
name, defaults are filled at load time, and the effective configuration
round-trips exactly: format_config -> load_config gives back an equal value.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable

from .serialize import fmt_value

__all__ = [
    "MODES",
    "ConfigError",
    "ExperimentConfig",
    "load_config",
    "parse_config_text",
    "format_config",
    "config_to_mapping",
    "config_from_mapping",
    "with_seed",
]

MODES = ("iterate", "maximize", "fit", "sweep", "emerge")


class ConfigError(ValueError):
    """Invalid configuration file or value."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment parameters; fields outside the mode stay None."""

    mode: str
    seed: int = 0
    # iterator-backed modes
    n: int | None = None
    steps: int | None = None
    alpha: float | None = None
    start_scale: float | None = None
    sigma_floor_ratio: float | None = None
    background_sigma: float | None = None
    rare_prob: float | None = None
    rare_lo: float | None = None
    rare_hi: float | None = None
    record_every: int | None = None
    record_matrices: bool | None = None
    link_threshold: float | None = None
    threshold_mode: str | None = None
    threshold_value: float | None = None
    jaccard_threshold: float | None = None
    max_roots: int | None = None
    # likelihood-backed modes
    total_n: int | None = None
    link_prob: float | None = None
    p_grid: tuple[float, ...] | None = None
    depth_min: int | None = None
    depth_max: int | None = None
    trim_floor: float | None = None
    # fit mode
    profile_path: str | None = None


@dataclass(frozen=True)
class _Key:
    name: str                      # key as written in the file
    attr: str                      # ExperimentConfig attribute
    kind: str                      # int | float | bool | str | floats | choice
    required: bool = False
    default: object = None         # value, or callable(resolved dict) -> value
    check: Callable | None = None  # value -> error text or None
    choices: tuple[str, ...] | None = None


def _positive(v):
    return None if v > 0 else f"must be > 0, got {fmt_value(v)}"


def _non_negative(v):
    return None if v >= 0 else f"must be >= 0, got {fmt_value(v)}"


def _even_node_count(v):
    if v < 2:
        return f"degenerate size: must be >= 2, got {v}"
    if v % 2:
        return f"odd dimension: must be even, got {v}"
    return None


def _unit_open(v):
    return None if 0.0 < v < 1.0 else f"must be in (0, 1), got {fmt_value(v)}"


def _unit_closed(v):
    return None if 0.0 <= v <= 1.0 else f"must be in [0, 1], got {fmt_value(v)}"


def _unit_half_open(v):
    return None if 0.0 < v <= 1.0 else f"must be in (0, 1], got {fmt_value(v)}"


_SEED = _Key("seed", "seed", "int", default=0,
             check=lambda v: None if v >= 0 else "must be >= 0")

_ITERATOR_KEYS = [
    _Key("n", "n", "int", required=True, check=_even_node_count),
    _Key("steps", "steps", "int", required=True,
         check=lambda v: None if v >= 0 else "must be >= 0"),
    _Key("alpha", "alpha", "float", default=0.1, check=_positive),
    _Key("start_scale", "start_scale", "float", default=1e-6, check=_positive),
    _Key("sigma_floor_ratio", "sigma_floor_ratio", "float", default=1e-8, check=_unit_open),
    _Key("background_sigma", "background_sigma", "float", default=0.001,
         check=_non_negative),
    _Key("rare_prob", "rare_prob", "float", default=1e-4, check=_unit_closed),
    _Key("rare_lo", "rare_lo", "float", default=1.0, check=_non_negative),
    _Key("rare_hi", "rare_hi", "float", default=2.0, check=_non_negative),
]

_DEPTH_KEYS = [
    _Key("depth_min", "depth_min", "int", default=2,
         check=lambda v: None if v >= 1 else "must be >= 1"),
    _Key("depth_max", "depth_max", "int",
         default=lambda vals: min(vals["N"] - 1, 120),
         check=lambda v: None if v >= 1 else "must be >= 1"),
]

_TRIM = _Key("trim_floor", "trim_floor", "float", default=5.0,
             check=_non_negative)

_MODE_KEYS: dict[str, list[_Key]] = {
    "iterate": [
        _SEED,
        *_ITERATOR_KEYS,
        _Key("record_every", "record_every", "int", default=1,
             check=lambda v: None if v >= 1 else "must be >= 1"),
        _Key("record_matrices", "record_matrices", "bool", default=False),
        _Key("link_threshold", "link_threshold", "float", default=1.0,
             check=_non_negative),
    ],
    "maximize": [
        _SEED,
        _Key("N", "total_n", "int", required=True,
             check=lambda v: None if v >= 2 else "must be >= 2"),
        _Key("p", "link_prob", "float", required=True, check=_unit_open),
        *_DEPTH_KEYS,
        _TRIM,
    ],
    "fit": [
        _SEED,
        _Key("profile_path", "profile_path", "str", required=True),
        _TRIM,
    ],
    "sweep": [
        _SEED,
        _Key("N", "total_n", "int", required=True,
             check=lambda v: None if v >= 2 else "must be >= 2"),
        _Key("p_grid", "p_grid", "floats", required=True,
             check=lambda vs: None if all(0.0 < v < 1.0 for v in vs)
             else "every entry must be in (0, 1)"),
        *_DEPTH_KEYS,
        _TRIM,
    ],
    "emerge": [
        _SEED,
        *_ITERATOR_KEYS,
        _Key("record_every", "record_every", "int", default=10,
             check=lambda v: None if v >= 1 else "must be >= 1"),
        _Key("threshold_mode", "threshold_mode", "choice", default="absolute",
             choices=("absolute", "quantile")),
        _Key("threshold_value", "threshold_value", "float", default=0.5,
             check=_non_negative),
        _Key("jaccard_threshold", "jaccard_threshold", "float", default=0.5,
             check=_unit_half_open),
        _Key("max_roots", "max_roots", "int", default=32,
             check=lambda v: None if v >= 1 else "must be >= 1"),
        _TRIM,
    ],
}


def _parse_value(key: _Key, raw: str):
    if key.kind == "int":
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"key '{key.name}': expected an integer, got '{raw}'") from None
    if key.kind == "float":
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"key '{key.name}': expected a number, got '{raw}'") from None
    if key.kind == "bool":
        low = raw.lower()
        if low in ("true", "false"):
            return low == "true"
        raise ConfigError(f"key '{key.name}': expected true or false, got '{raw}'")
    if key.kind == "floats":
        parts = [tok.strip() for tok in raw.split(",")]
        if not parts or any(not tok for tok in parts):
            raise ConfigError(f"key '{key.name}': expected comma-separated numbers, got '{raw}'")
        try:
            return tuple(float(tok) for tok in parts)
        except ValueError:
            raise ConfigError(f"key '{key.name}': expected comma-separated numbers, got '{raw}'") from None
    if key.kind == "choice":
        if raw in key.choices:
            return raw
        raise ConfigError(f"key '{key.name}': must be one of {', '.join(key.choices)}, got '{raw}'")
    return raw


def _format_value(key: _Key, value) -> str:
    if key.kind == "floats":
        return ", ".join(fmt_value(float(v)) for v in value)
    return fmt_value(value)


def _cross_validate(mode: str, vals: dict) -> None:
    if mode in ("maximize", "sweep"):
        if vals["depth_max"] > vals["N"] - 1:
            raise ConfigError(
                f"key 'depth_max': infeasible depth {vals['depth_max']} exceeds N-1 = {vals['N'] - 1}"
            )
        if vals["depth_min"] > vals["depth_max"]:
            raise ConfigError(
                f"key 'depth_min': empty depth range [{vals['depth_min']}, {vals['depth_max']}]"
            )
    if mode in ("iterate", "emerge") and vals["rare_prob"] > 0:
        if vals["rare_lo"] <= 0:
            raise ConfigError("key 'rare_lo': must be > 0 when rare_prob > 0")
        if vals["rare_hi"] < vals["rare_lo"]:
            raise ConfigError("key 'rare_hi': must be >= rare_lo")
    if mode == "emerge" and vals["threshold_mode"] == "quantile":
        if not 0.0 < vals["threshold_value"] <= 1.0:
            raise ConfigError("key 'threshold_value': quantile mode needs a value in (0, 1]")


def parse_config_text(text: str, source: str = "<config>") -> ExperimentConfig:
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got '{stripped}'")
        name, value = stripped.split("=", 1)
        name = name.strip()
        value = value.strip()
        if not name:
            raise ConfigError(f"{source}:{lineno}: empty key")
        if name in raw:
            raise ConfigError(f"{source}:{lineno}: duplicate key '{name}'")
        raw[name] = value

    if "mode" not in raw:
        raise ConfigError(f"{source}: missing required key 'mode'")
    mode = raw.pop("mode")
    if mode not in MODES:
        raise ConfigError(f"key 'mode': must be one of {', '.join(MODES)}, got '{mode}'")

    schema = _MODE_KEYS[mode]
    allowed = {k.name for k in schema}
    for name in raw:
        if name not in allowed:
            raise ConfigError(f"unknown key '{name}' for mode '{mode}'")

    vals: dict[str, object] = {}
    for key in schema:
        if key.name in raw:
            value = _parse_value(key, raw[key.name])
        elif key.required:
            raise ConfigError(f"missing required key '{key.name}' for mode '{mode}'")
        else:
            value = key.default(vals) if callable(key.default) else key.default
        if key.check is not None and value is not None:
            problem = key.check(value)
            if problem:
                raise ConfigError(f"key '{key.name}': {problem}")
        vals[key.name] = value

    _cross_validate(mode, vals)
    return ExperimentConfig(mode=mode, **{k.attr: vals[k.name] for k in schema})


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return parse_config_text(text, source=str(path))


def config_to_mapping(config: ExperimentConfig) -> dict:
    """Effective configuration as an ordered, JSON-ready mapping."""
    out: dict[str, object] = {"mode": config.mode}
    for key in _MODE_KEYS[config.mode]:
        value = getattr(config, key.attr)
        out[key.name] = list(value) if key.kind == "floats" else value
    return out


def format_config(config: ExperimentConfig) -> str:
    """Render the effective configuration in the `key = value` file format."""
    lines = [f"mode = {config.mode}"]
    for key in _MODE_KEYS[config.mode]:
        lines.append(f"{key.name} = {_format_value(key, getattr(config, key.attr))}")
    return "\n".join(lines) + "\n"


def config_from_mapping(mapping: dict) -> ExperimentConfig:
    """Rebuild a config from a mapping such as a report's config block."""
    lines = []
    for name, value in mapping.items():
        if isinstance(value, (list, tuple)):
            rendered = ", ".join(fmt_value(float(v)) for v in value)
        else:
            rendered = fmt_value(value)
        lines.append(f"{name} = {rendered}")
    return parse_config_text("\n".join(lines), source="<mapping>")


def with_seed(config: ExperimentConfig, seed: int) -> ExperimentConfig:
    if seed < 0:
        raise ConfigError("key 'seed': must be >= 0")
    return replace(config, seed=seed)

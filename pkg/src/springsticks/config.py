"""Flat, line-oriented experiment configuration.

Files hold one ``section.key = value`` assignment per line; ``#`` starts a
comment.  Values are parsed as bool/int/float/string scalars, comma lists, or
axis specs of the form ``logspace:lo:hi:n`` / ``linspace:lo:hi:n``.  Domains
are comma lists of ``lo:hi`` intervals, one per input dimension.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ConfigError

__all__ = [
    "parse_config_text",
    "load_config",
    "dump_config",
    "get",
    "get_axis",
    "get_domain",
    "EXPERIMENT_IDS",
]

EXPERIMENT_IDS = ("fit", "scale-sweep", "tlb-expressivity", "tlb-heatmap",
                  "error-scaling", "entropy")

_MISSING = object()


def _coerce_scalar(text: str):
    low = text.lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    return text


def parse_config_text(text: str) -> dict:
    """Parse ``section.key = value`` lines into a flat dict of raw strings."""
    cfg: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'section.key = value', got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        if not key or "." not in key:
            raise ConfigError(f"line {lineno}: key must look like 'section.key', got {key!r}")
        cfg[key] = value.strip()
    return cfg


def load_config(path) -> dict:
    try:
        with open(path) as fh:
            return parse_config_text(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc


def dump_config(cfg: dict) -> str:
    return "".join(f"{k} = {cfg[k]}\n" for k in sorted(cfg))


def get(cfg: dict, key: str, default=_MISSING, kind=None):
    """Fetch and coerce one value; errors name the missing/invalid field path."""
    if key not in cfg:
        if default is _MISSING:
            raise ConfigError(f"missing required config key {key!r}")
        return default
    value = _coerce_scalar(str(cfg[key]))
    if kind is not None:
        try:
            if kind is bool:
                if not isinstance(value, bool):
                    raise ValueError("expected true/false")
            elif kind is int:
                if isinstance(value, bool) or not isinstance(value, (int,)):
                    raise ValueError("expected integer")
            elif kind is float:
                if isinstance(value, bool) or not isinstance(value, (int, float)):
                    raise ValueError("expected number")
                value = float(value)
            elif kind is str:
                value = str(cfg[key]).strip()
        except ValueError as exc:
            raise ConfigError(f"config key {key!r}: {exc} (got {cfg[key]!r})") from exc
    return value


def get_list(cfg: dict, key: str, default=_MISSING, kind=float):
    if key not in cfg:
        if default is _MISSING:
            raise ConfigError(f"missing required config key {key!r}")
        return default
    parts = [p.strip() for p in str(cfg[key]).split(",") if p.strip()]
    if not parts:
        raise ConfigError(f"config key {key!r}: empty list")
    try:
        return [kind(p) for p in parts]
    except ValueError as exc:
        raise ConfigError(f"config key {key!r}: {exc}") from exc


def get_axis(cfg: dict, key: str, default=_MISSING) -> np.ndarray:
    """Numeric sweep axis: comma list or logspace:lo:hi:n / linspace:lo:hi:n."""
    if key not in cfg:
        if default is _MISSING:
            raise ConfigError(f"missing required config key {key!r}")
        return np.asarray(default, dtype=float)
    text = str(cfg[key]).strip()
    if text.startswith(("logspace:", "linspace:")):
        name, *rest = text.split(":")
        if len(rest) != 3:
            raise ConfigError(f"config key {key!r}: expected {name}:lo:hi:n")
        try:
            lo, hi, n = float(rest[0]), float(rest[1]), int(rest[2])
        except ValueError as exc:
            raise ConfigError(f"config key {key!r}: {exc}") from exc
        if n < 1 or (name == "logspace" and (lo <= 0 or hi <= 0)):
            raise ConfigError(f"config key {key!r}: invalid {name} bounds")
        if name == "logspace":
            return np.logspace(math.log10(lo), math.log10(hi), n)
        return np.linspace(lo, hi, n)
    values = np.asarray(get_list(cfg, key), dtype=float)
    if values.size == 0:
        raise ConfigError(f"config key {key!r}: sweep axis must be nonempty")
    return values


def get_domain(cfg: dict, key: str, default=_MISSING) -> tuple[tuple[float, float], ...]:
    """Per-dimension intervals, e.g. ``0:1,0:1`` for the unit square."""
    if key not in cfg:
        if default is _MISSING:
            raise ConfigError(f"missing required config key {key!r}")
        return default
    out = []
    for part in str(cfg[key]).split(","):
        part = part.strip()
        if ":" not in part:
            raise ConfigError(f"config key {key!r}: interval must be lo:hi, got {part!r}")
        lo_s, hi_s = part.split(":", 1)
        try:
            lo, hi = float(lo_s), float(hi_s)
        except ValueError as exc:
            raise ConfigError(f"config key {key!r}: {exc}") from exc
        if hi <= lo:
            raise ConfigError(f"config key {key!r}: interval {part!r} is empty")
        out.append((lo, hi))
    return tuple(out)

"""Run configuration: every tunable constant of the enhancer in one place.

Config files are flat ``key = value`` text. Keys match the field names of
:class:`RunConfig`; ``#`` starts a comment.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, fields
from pathlib import Path


class ConfigError(ValueError):
    """Raised for unknown keys or unparsable values."""


@dataclass
class RunConfig:
    # filterbank
    fc1: float = 80.0
    erb_step: float = 0.5
    num_filters: int = 47
    n_gd: int = 128
    fs: int = 8000

    # framing
    frame_len: int = 256
    hop: int = 128

    # period grid / band split
    f0_min: float = 70.0
    f0_max: float = 420.0
    split_hz: float = 1500.0
    cfr_max: float = 1e4

    # stationary-noise onset estimator
    alpha_stat: float = 0.96
    delta_onset: float = 1.4

    # dual thresholds: snr threshold = clamp(base + slope * (x - 10), lo, hi)
    snrthd1_base: float = 0.6
    snrthd1_slope: float = 0.03
    snrthd1_lo: float = 0.3
    snrthd1_hi: float = 0.9
    snrthd2_base: float = 0.2
    snrthd2_slope: float = 0.01
    snrthd2_lo: float = 0.1
    snrthd2_hi: float = 0.2

    # memory-P0 and continuity
    mem_depth: int = 50
    mem_dev: float = 0.4
    continuity_gap: int = 3

    # noise / a-priori SNR
    beta1: float = 0.9
    beta1_fast: float = 0.8
    beta2: float = 0.96
    beta2_fast: float = 0.8
    beta3: float = 0.9

    # gain
    g_min: float = 0.178
    smooth_prev: float = 0.1
    smooth_neighbor: float = 0.3
    smooth_self: float = 0.6
    comb_enabled: bool = True

    def __post_init__(self) -> None:
        if self.hop * 2 != self.frame_len:
            raise ConfigError("hop must be exactly half of frame_len")
        if not 0.0 < self.g_min <= 1.0:
            raise ConfigError("g_min must lie in (0, 1]")
        if self.mem_depth < 1:
            raise ConfigError("mem_depth must be >= 1")

    def overrides(self) -> dict:
        """Fields that differ from the defaults."""
        default = RunConfig()
        return {
            f.name: getattr(self, f.name)
            for f in fields(self)
            if getattr(self, f.name) != getattr(default, f.name)
        }

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)


def _coerce(name: str, raw: str, typ: type):
    raw = raw.strip()
    try:
        if typ is bool:
            low = raw.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if typ is int:
            return int(raw)
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {name}: {raw!r}") from exc


def _field_types() -> dict[str, type]:
    # annotations are strings under ``from __future__ import annotations``
    lookup = {"float": float, "int": int, "bool": bool}
    return {f.name: lookup[f.type] for f in fields(RunConfig)}


def parse_overrides(pairs: dict[str, str]) -> dict:
    types = _field_types()
    out = {}
    for key, raw in pairs.items():
        if key not in types:
            raise ConfigError(f"unknown config key: {key}")
        out[key] = _coerce(key, raw, types[key])
    return out


def read_config_text(text: str) -> dict[str, str]:
    pairs: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        pairs[key.strip()] = value.strip()
    return pairs


def load_config(path: str | Path | None = None, **overrides: str) -> RunConfig:
    """Build a config from an optional file, then apply string overrides."""
    pairs: dict[str, str] = {}
    if path is not None:
        pairs.update(read_config_text(Path(path).read_text()))
    pairs.update(overrides)
    try:
        return RunConfig(**parse_overrides(pairs))
    except TypeError as exc:  # pragma: no cover - guarded by parse_overrides
        raise ConfigError(str(exc)) from exc


def format_config(cfg: RunConfig) -> str:
    return "".join(f"{f.name} = {getattr(cfg, f.name)}\n" for f in fields(cfg))


__all__ = [
    "ConfigError",
    "RunConfig",
    "format_config",
    "load_config",
    "parse_overrides",
    "read_config_text",
]

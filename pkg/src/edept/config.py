"""Run configuration: a versioned JSON schema mapped onto nested dataclasses.

Parsing is strict: unknown or ill-typed keys fail with the offending key
named, and serialize/parse round-trips are lossless.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field as dc_field
from pathlib import Path

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Configuration file or override rejected; the message names the key."""


@dataclass
class ParamsConfig:
    alpha: int = 1
    g0: float = 1.0
    g1: float = 1.0
    g2: float = 1.0
    branch: str = "auto"  # auto | real | imag | analytic


@dataclass
class ModeGridConfig:
    k_max: float = 14.0
    n_k_rho: int = 200
    n_k_z: int = 401


@dataclass
class TransformConfig:
    samples_per_period: float = 8.0
    tail_rel: float = 1e-6
    min_extent: float = 30.0
    max_extent: float = 240.0


@dataclass
class PositionGridConfig:
    rho_min_scale: float = 1e-3   # in units of max(g1, g2)
    rho_max_scale: float = 1e3
    n_rho: int = 800
    z_max_scale: float = 1e3
    n_z: int = 8001


@dataclass
class FieldGridConfig:
    rho_max: float = 4.0
    n_rho: int = 33
    z_min: float = -4.0
    z_max: float = 4.0
    n_z: int = 33
    times: list[float] = dc_field(default_factory=lambda: [0.0])


@dataclass
class FitConfig:
    window_lo: float = 50.0
    window_hi: float = 500.0
    alt_window_lo: float = 100.0
    alt_window_hi: float = 1000.0
    n_radii: int = 56
    direction_angles_deg: list[float] = dc_field(
        default_factory=lambda: [90.0, 45.0, 30.0])
    r_squared_floor: float = 0.98


@dataclass
class ScanConfig:
    alphas: list[int] = dc_field(default_factory=lambda: [1, 2, 3, 4])


@dataclass
class ToleranceConfig:
    maxwell_residual: float = 1e-8
    azimuthal_structure: float = 1e-12
    conjugation_symmetry: float = 1e-12
    derivative_agreement: float = 1e-5
    transversality: float = 1e-6
    e_relation: float = 2.5e-4
    b_relation: float = 2.5e-4
    roundtrip_t0: float = 1e-3
    roundtrip_t1: float = 1e-3
    parseval: float = 1e-2
    energy_drift: float = 5e-3
    norm_doubling: float = 5e-3
    potential_exponent: float = 0.15
    falloff_exponent: float = 0.3
    increment_spread: float = 0.3
    window_agreement: float = 0.1

    def validate(self):
        for f in dataclasses.fields(self):
            if getattr(self, f.name) <= 0:
                raise ConfigError(f"tolerances.{f.name} must be positive")


@dataclass
class OutputConfig:
    directory: str = "."
    float_format: str = ".16e"  # 17 significant digits, scientific


@dataclass
class RunConfig:
    schema_version: int = SCHEMA_VERSION
    params: ParamsConfig = dc_field(default_factory=ParamsConfig)
    mode_grid: ModeGridConfig = dc_field(default_factory=ModeGridConfig)
    transform: TransformConfig = dc_field(default_factory=TransformConfig)
    position_grid: PositionGridConfig = dc_field(default_factory=PositionGridConfig)
    field_grid: FieldGridConfig = dc_field(default_factory=FieldGridConfig)
    fit: FitConfig = dc_field(default_factory=FitConfig)
    scan: ScanConfig = dc_field(default_factory=ScanConfig)
    tolerances: ToleranceConfig = dc_field(default_factory=ToleranceConfig)
    output: OutputConfig = dc_field(default_factory=OutputConfig)
    t: float = 0.0
    energy_time_slices: list[float] = dc_field(
        default_factory=lambda: [0.0, 1.0, 2.0])
    seed: int = 20260810
    workers: int = 1

    def validate(self) -> "RunConfig":
        if self.schema_version != SCHEMA_VERSION:
            raise ConfigError(f"schema_version must be {SCHEMA_VERSION}")
        if self.params.alpha < 1:
            raise ConfigError("params.alpha must be >= 1")
        for g in ("g0", "g1", "g2"):
            if getattr(self.params, g) <= 0:
                raise ConfigError(f"params.{g} must be positive")
        if self.params.branch not in ("auto", "real", "imag", "analytic"):
            raise ConfigError("params.branch must be auto|real|imag|analytic")
        if not self.fit.window_lo < self.fit.window_hi:
            raise ConfigError("fit.window_lo must be below fit.window_hi")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        self.tolerances.validate()
        return self


_NUMERIC = (int, float)


def _coerce(cls, data, path):
    if not isinstance(data, dict):
        raise ConfigError(f"{path or 'config'}: expected an object")
    fields = {f.name: f for f in dataclasses.fields(cls)}
    unknown = set(data) - set(fields)
    if unknown:
        key = sorted(unknown)[0]
        raise ConfigError(f"unknown key {(path + '.' if path else '') + key!s}")
    kwargs = {}
    for name, value in data.items():
        f = fields[name]
        sub = f"{path + '.' if path else ''}{name}"
        if dataclasses.is_dataclass(f.type) or (isinstance(f.type, str)
                                                and f.type.endswith("Config")):
            kwargs[name] = _coerce(_CONFIG_TYPES[f.type if isinstance(f.type, str)
                                                 else f.type.__name__], value, sub)
        elif isinstance(value, dict):
            raise ConfigError(f"{sub}: unexpected object")
        else:
            kwargs[name] = _check_scalar(f, value, sub)
    return cls(**kwargs)


def _check_scalar(f, value, path):
    ann = f.type if isinstance(f.type, str) else getattr(f.type, "__name__", "")
    if ann == "int":
        if not isinstance(value, int) or isinstance(value, bool):
            raise ConfigError(f"{path}: expected an integer")
        return value
    if ann == "float":
        if not isinstance(value, _NUMERIC) or isinstance(value, bool):
            raise ConfigError(f"{path}: expected a number")
        return float(value)
    if ann == "str":
        if not isinstance(value, str):
            raise ConfigError(f"{path}: expected a string")
        return value
    if ann.startswith("list"):
        if not isinstance(value, list):
            raise ConfigError(f"{path}: expected a list")
        if "int" in ann:
            if any(not isinstance(v, int) or isinstance(v, bool) for v in value):
                raise ConfigError(f"{path}: expected a list of integers")
            return list(value)
        if any(not isinstance(v, _NUMERIC) or isinstance(v, bool) for v in value):
            raise ConfigError(f"{path}: expected a list of numbers")
        return [float(v) for v in value]
    return value


_CONFIG_TYPES = {c.__name__: c for c in (
    ParamsConfig, ModeGridConfig, TransformConfig, PositionGridConfig,
    FieldGridConfig, FitConfig, ScanConfig, ToleranceConfig, OutputConfig)}


def config_from_dict(data: dict) -> RunConfig:
    return _coerce(RunConfig, data, "").validate()


def config_to_dict(cfg: RunConfig) -> dict:
    return dataclasses.asdict(cfg)


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as err:
        raise ConfigError(f"cannot read config file {path}: {err}") from err
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError(f"config file {path} is not valid JSON: "
                          f"line {err.lineno} column {err.colno}") from err
    return config_from_dict(data)


def save_config(cfg: RunConfig, path) -> None:
    Path(path).write_text(json.dumps(config_to_dict(cfg), indent=2,
                                     sort_keys=False) + "\n", encoding="utf-8")

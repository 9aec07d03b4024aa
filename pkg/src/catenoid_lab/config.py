"""Experiment configuration: nested dataclasses loaded from YAML or JSON.

Unknown keys and out-of-range values are load errors.  ``to_dict`` followed
by ``from_dict`` is the identity, and the canonical JSON form is what the
config hash in run manifests is computed from.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import yaml

SCHEMA_VERSION = 1

__all__ = [
    "ConfigError",
    "GridConfig",
    "SectorData",
    "SourceConfig",
    "EvolutionConfig",
    "ModulationConfig",
    "ShootingConfig",
    "TailsConfig",
    "ExperimentConfig",
    "load_config",
    "SCHEMA_VERSION",
]


class ConfigError(ValueError):
    def __init__(self, field_name: str, reason: str):
        super().__init__(f"{field_name}: {reason}")
        self.field = field_name
        self.reason = reason


def _require(cond: bool, name: str, reason: str):
    if not cond:
        raise ConfigError(name, reason)


@dataclass(frozen=True)
class GridConfig:
    rho_max: float = 60.0
    n_points: int = 2401

    def validate(self, p="grid"):
        _require(self.rho_max > 0, f"{p}.rho_max", "must be positive")
        _require(isinstance(self.n_points, int) and self.n_points >= 33 and self.n_points % 2 == 1,
                 f"{p}.n_points", "must be an odd integer >= 33")


@dataclass(frozen=True)
class SectorData:
    """Initial data in one harmonic sector: compact bumps (1 - x^2)^6 in psi and d_t psi."""

    ell: int = 2
    m: int = 0
    center: float = 0.0
    width: float = 3.0
    amplitude: float = 1.0
    velocity_amplitude: float = 0.0

    def validate(self, p):
        _require(self.ell >= 0, f"{p}.ell", "must be >= 0")
        _require(0 <= self.m <= 2 * self.ell, f"{p}.m", "must lie in [0, 2 ell]")
        _require(self.width > 0, f"{p}.width", "must be positive")


@dataclass(frozen=True)
class SourceConfig:
    """<rho>^-a times a tagged time profile in one sector."""

    ell: int = 0
    m: int = 0
    a: float = 4.0
    time_profile: tuple = ("japanese", 2.5, 0.0)
    cutoff: float = 0.0

    def validate(self, p):
        _require(self.ell >= 0 and 0 <= self.m <= 2 * self.ell, f"{p}.ell/m", "invalid sector")
        _require(self.a > 0, f"{p}.a", "must be positive")
        _require(self.cutoff >= 0, f"{p}.cutoff", "must be >= 0")
        _require(len(self.time_profile) >= 1 and self.time_profile[0] in ("const", "japanese", "gaussian", "bump"),
                 f"{p}.time_profile", "unknown tag")


@dataclass(frozen=True)
class EvolutionConfig:
    dt_safety: float = 0.4
    T_final: float = 20.0
    alpha: float = 0.1
    R_tilde: float = 10.0
    sample_every: int = 25
    probes: tuple = (0.0, 1.0, 5.0)
    sectors: tuple = (SectorData(),)
    sources: tuple = ()

    def validate(self, p="evolution"):
        _require(0 < self.dt_safety <= 1 / 2 ** 0.5, f"{p}.dt_safety", "must lie in (0, 1/sqrt 2]")
        _require(self.T_final > 0, f"{p}.T_final", "must be positive")
        _require(0 < self.alpha < 1, f"{p}.alpha", "must lie in (0, 1)")
        _require(self.R_tilde > 0, f"{p}.R_tilde", "must be positive")
        _require(self.sample_every >= 1, f"{p}.sample_every", "must be >= 1")
        _require(len(self.sectors) >= 1, f"{p}.sectors", "need at least one sector")
        for i, s in enumerate(self.sectors):
            s.validate(f"{p}.sectors[{i}]")
        for i, s in enumerate(self.sources):
            s.validate(f"{p}.sources[{i}]")


@dataclass(frozen=True)
class ModulationConfig:
    R_ctf: float = 8.0

    def validate(self, p="modulation"):
        _require(self.R_ctf >= 1, f"{p}.R_ctf", "must be >= 1")


@dataclass(frozen=True)
class ShootingConfig:
    rho_max: float = 40.0
    h: float = 0.05
    dt: float = 0.02
    T_final: float = 40.0
    bracket: tuple = (-1.0, 1.0)
    envelope_factor: float = 1e3
    tol: float = 1e-13
    precision: str = "double"
    support: float = 6.0

    def validate(self, p="shooting"):
        _require(self.rho_max > 0 and self.h > 0, f"{p}.rho_max/h", "must be positive")
        _require(0 < self.dt <= self.h / 2 ** 0.5, f"{p}.dt", "violates dt <= h / sqrt 2")
        _require(self.T_final > 0, f"{p}.T_final", "must be positive")
        _require(len(self.bracket) == 2 and self.bracket[0] < self.bracket[1], f"{p}.bracket", "need lo < hi")
        _require(self.envelope_factor > 0, f"{p}.envelope_factor", "must be positive")
        _require(0 < self.tol < 1, f"{p}.tol", "must lie in (0, 1)")
        _require(self.precision in ("double", "dd"), f"{p}.precision", "must be 'double' or 'dd'")


@dataclass(frozen=True)
class TailsConfig:
    a: float = 4.0
    b: float = 2.5
    probes: tuple = (1.0, 5.0)
    window: tuple = (50.0, 800.0)
    n_times: int = 24

    def validate(self, p="tails"):
        _require(self.a >= 3, f"{p}.a", "must be >= 3")
        _require(self.b > 1, f"{p}.b", "must be > 1")
        _require(all(r >= 0 for r in self.probes), f"{p}.probes", "must be >= 0")
        _require(len(self.window) == 2 and 0 < self.window[0] and 4 * self.window[0] <= self.window[1],
                 f"{p}.window", "need 0 < t0 and t1 >= 4 t0")
        _require(self.n_times >= 8, f"{p}.n_times", "must be >= 8")


@dataclass(frozen=True)
class ExperimentConfig:
    version: int = SCHEMA_VERSION
    grid: GridConfig = GridConfig()
    evolution: EvolutionConfig = EvolutionConfig()
    modulation: ModulationConfig = ModulationConfig()
    shooting: ShootingConfig = ShootingConfig()
    tails: TailsConfig = TailsConfig()
    output_dir: str = "runs"
    seed: int = 0

    def validate(self) -> "ExperimentConfig":
        _require(self.version == SCHEMA_VERSION, "version", f"unsupported schema version (expected {SCHEMA_VERSION})")
        self.grid.validate()
        self.evolution.validate()
        self.modulation.validate()
        self.shooting.validate()
        self.tails.validate()
        _require(isinstance(self.seed, int) and self.seed >= 0, "seed", "must be a non-negative integer")
        return self

    def to_dict(self) -> dict:
        return _to_plain(dataclasses.asdict(self))

    def canonical_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()[:16]

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        return _build(cls, data, "").validate()

    def replace(self, **kw) -> "ExperimentConfig":
        return dataclasses.replace(self, **kw).validate()


def _to_plain(x):
    if isinstance(x, dict):
        return {k: _to_plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_to_plain(v) for v in x]
    return x


_NESTED = {
    ("ExperimentConfig", "grid"): GridConfig,
    ("ExperimentConfig", "evolution"): EvolutionConfig,
    ("ExperimentConfig", "modulation"): ModulationConfig,
    ("ExperimentConfig", "shooting"): ShootingConfig,
    ("ExperimentConfig", "tails"): TailsConfig,
}
_NESTED_LISTS = {
    ("EvolutionConfig", "sectors"): SectorData,
    ("EvolutionConfig", "sources"): SourceConfig,
}


def _coerce(value, default, name):
    if isinstance(default, bool):
        _require(isinstance(value, bool), name, "expected a boolean")
        return value
    if isinstance(default, int):
        _require(isinstance(value, int) and not isinstance(value, bool), name, "expected an integer")
        return value
    if isinstance(default, float):
        _require(isinstance(value, (int, float)) and not isinstance(value, bool), name, "expected a number")
        return float(value)
    if isinstance(default, str):
        _require(isinstance(value, str), name, "expected a string")
        return value
    if isinstance(default, tuple):
        _require(isinstance(value, (list, tuple)), name, "expected a list")
        return tuple(value)
    return value


def _build(cls, data, prefix):
    _require(isinstance(data, dict), prefix or "<root>", "expected a mapping")
    fields = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - set(fields))
    if unknown:
        raise ConfigError(f"{prefix}{unknown[0]}", "unknown field")
    kwargs = {}
    defaults = cls()
    for name, value in data.items():
        full = f"{prefix}{name}"
        sub = _NESTED.get((cls.__name__, name))
        item = _NESTED_LISTS.get((cls.__name__, name))
        if sub is not None:
            kwargs[name] = _build(sub, value, full + ".")
        elif item is not None:
            _require(isinstance(value, (list, tuple)), full, "expected a list")
            kwargs[name] = tuple(_build(item, v, f"{full}[{i}].") for i, v in enumerate(value))
        else:
            kwargs[name] = _coerce(value, getattr(defaults, name), full)
    return cls(**kwargs)


def load_config(path: str | Path | None) -> ExperimentConfig:
    """Load YAML or JSON (JSON is valid YAML); ``None`` gives the defaults."""
    if path is None:
        return ExperimentConfig().validate()
    text = Path(path).read_text()
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError("<file>", f"unparseable: {exc}") from exc
    return ExperimentConfig.from_dict(data or {})

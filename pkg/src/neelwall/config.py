"""Run configuration: one JSON document with per-command sections."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

from .errors import ConfigError
from .grid import Grid

__all__ = [
    "GridConfig",
    "ProfileConfig",
    "SpectraConfig",
    "DynamicsConfig",
    "OutputConfig",
    "RunConfig",
    "load_config",
]

_SHAPES = ("even_bump", "odd_bump", "random")


@dataclass
class GridConfig:
    n: int = 2048
    half_width: float = 60.0
    pad_factor: int = 1

    def validate(self):
        if self.n < 4 or (self.n & (self.n - 1)) != 0:
            raise ConfigError(f"grid.n must be a power of two >= 4, got {self.n}")
        if not self.half_width > 0:
            raise ConfigError("grid.half_width must be positive")
        if self.pad_factor < 1:
            raise ConfigError("grid.pad_factor must be a positive integer")

    def build(self) -> Grid:
        return Grid(self.n, self.half_width, self.pad_factor)


@dataclass
class ProfileConfig:
    tol_residual: float = 1e-11
    max_iters: int = 5000

    def validate(self):
        if not self.tol_residual > 0:
            raise ConfigError("profile.tol_residual must be positive")
        if self.max_iters < 1:
            raise ConfigError("profile.max_iters must be at least 1")


@dataclass
class SpectraConfig:
    nu_list: tuple = (0.5, 1.0, 2.0, 3.0)
    zero_mode_tol: float = 1e-5
    xi_max: float = 50.0
    xi_samples: int = 4096
    companion_n: int = 512
    companion_half_width: float = 60.0

    def validate(self):
        if len(self.nu_list) == 0:
            raise ConfigError("spectra.nu_list must not be empty")
        if any(nu <= 0 for nu in self.nu_list):
            raise ConfigError("spectra.nu_list entries must be positive")
        if not self.zero_mode_tol > 0:
            raise ConfigError("spectra.zero_mode_tol must be positive")
        if not self.xi_max > 0 or self.xi_samples < 2:
            raise ConfigError("spectra xi sampling must be positive")
        if self.companion_n < 4 or (self.companion_n & (self.companion_n - 1)) != 0:
            raise ConfigError("spectra.companion_n must be a power of two >= 4")


@dataclass
class DynamicsConfig:
    nu: float = 1.0
    dt: float = 0.02
    T: float = 40.0
    every: int = 25
    amplitude: float = 0.05
    shape: str = "even_bump"
    seed: int = 7
    mode: str = "full_phase"
    initial_shift: float = 0.0

    def validate(self):
        if self.nu <= 0:
            raise ConfigError("dynamics.nu must be positive")
        if self.dt <= 0 or self.T <= 0:
            raise ConfigError("dynamics.dt and dynamics.T must be positive")
        if self.every < 1:
            raise ConfigError("dynamics.every must be at least 1")
        if self.amplitude < 0:
            raise ConfigError("dynamics.amplitude must be nonnegative")
        if self.shape not in _SHAPES:
            raise ConfigError(f"dynamics.shape must be one of {_SHAPES}")
        if self.mode not in ("full_phase", "perturbation"):
            raise ConfigError("dynamics.mode must be full_phase or perturbation")


@dataclass
class OutputConfig:
    directory: str = "out"
    formats: tuple = ("csv", "json")
    dump_matrices: bool = False

    def validate(self):
        known = {"csv", "json"}
        if not set(self.formats) <= known:
            raise ConfigError(f"output.formats entries must be in {sorted(known)}")


@dataclass
class RunConfig:
    grid: GridConfig = field(default_factory=GridConfig)
    profile: ProfileConfig = field(default_factory=ProfileConfig)
    spectra: SpectraConfig = field(default_factory=SpectraConfig)
    dynamics: DynamicsConfig = field(default_factory=DynamicsConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    def validate(self):
        for section in (self.grid, self.profile, self.spectra, self.dynamics, self.output):
            section.validate()

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {"grid", "profile", "spectra", "dynamics", "output"}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config sections: {sorted(unknown)}")
        sections = {}
        for name, section_cls in (
            ("grid", GridConfig),
            ("profile", ProfileConfig),
            ("spectra", SpectraConfig),
            ("dynamics", DynamicsConfig),
            ("output", OutputConfig),
        ):
            payload = dict(data.get(name, {}))
            valid = set(section_cls.__dataclass_fields__)
            bad = set(payload) - valid
            if bad:
                raise ConfigError(f"unknown keys in config section {name!r}: {sorted(bad)}")
            for key in ("nu_list", "formats"):
                if key in payload and isinstance(payload[key], list):
                    payload[key] = tuple(payload[key])
            sections[name] = section_cls(**payload)
        cfg = cls(**sections)
        cfg.validate()
        return cfg


def load_config(path) -> RunConfig:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    return RunConfig.from_dict(data)

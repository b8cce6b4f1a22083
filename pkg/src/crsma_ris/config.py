"""System configuration: geometry, budgets, fading and algorithm parameters.

All user-facing units follow the usual conventions (dB, dBm, meters,
bits/s/Hz).  Conversions to linear scale happen once, at construction; every
other module works in watts and linear gains.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

PL_LINK_LABELS = ("br", "rf", "bf", "nr", "nf", "bn")

DEFAULT_PL_EXPONENTS = {
    "br": 2.2,   # BS - RIS
    "rf": 2.2,   # RIS - far user
    "bf": 4.0,   # BS - far user
    "nr": 3.0,   # near user - RIS
    "nf": 3.0,   # near user - far user
    "bn": 3.5,   # BS - near user
}

DEFAULT_DELTA_GRID = tuple(round(0.1 * i, 1) for i in range(1, 11))


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def dbm_to_watts(x_dbm: float) -> float:
    return 10.0 ** (x_dbm / 10.0) * 1e-3


@dataclass(frozen=True)
class SystemConfig:
    """Full parameterization of one experiment instance."""

    n_antennas: int = 4
    n_ris_elements: int = 40
    pos_bs: tuple[float, float, float] = (0.0, 10.0, 0.0)
    pos_ris: tuple[float, float, float] = (80.0, 10.0, 0.0)
    pos_near: tuple[float, float, float] = (40.0, 0.0, 0.0)
    pos_far: tuple[float, float, float] = (80.0, 0.0, 0.0)
    pl_exponents: dict = field(default_factory=lambda: dict(DEFAULT_PL_EXPONENTS))
    rho0_db: float = -30.0
    rician_factor: float = 3.0
    noise_power_db: float = -120.0
    p_bs_dbm: float = 53.0
    p_d2d_dbm: float = 30.0
    rate_thresholds: tuple[float, float] = (1.0, 3.0)
    delta_grid: tuple = DEFAULT_DELTA_GRID
    tol_sca: float = 1e-4
    tol_ao: float = 1e-3
    zeta_dc: float = 1e-5
    max_iter_sca: int = 50
    max_iter_ao: int = 20
    max_iter_dc: int = 30
    rng_seed: int = 0

    # linear-scale values, filled in __post_init__
    noise_power: float = field(init=False, repr=False, default=0.0)
    p_bs: float = field(init=False, repr=False, default=0.0)
    p_d2d: float = field(init=False, repr=False, default=0.0)
    rho0: float = field(init=False, repr=False, default=0.0)

    def __post_init__(self):
        self._validate()
        object.__setattr__(self, "noise_power", db_to_linear(self.noise_power_db))
        object.__setattr__(self, "p_bs", dbm_to_watts(self.p_bs_dbm))
        object.__setattr__(self, "p_d2d", dbm_to_watts(self.p_d2d_dbm))
        object.__setattr__(self, "rho0", db_to_linear(self.rho0_db))

    def _validate(self):
        if self.n_antennas < 1:
            raise ValueError("n_antennas must be a positive integer")
        if self.n_ris_elements < 0:
            raise ValueError("n_ris_elements must be non-negative")
        missing = set(PL_LINK_LABELS) - set(self.pl_exponents)
        if missing:
            raise ValueError(f"pl_exponents missing link labels: {sorted(missing)}")
        if self.rician_factor < 0:
            raise ValueError("rician_factor must be non-negative")
        grid = tuple(self.delta_grid)
        if not grid:
            raise ValueError("delta_grid must be non-empty")
        if any(not (0.0 < d <= 1.0) for d in grid):
            raise ValueError("every delta must lie in (0, 1]")
        if any(b >= a for a, b in zip(grid[1:], grid[:-1])):
            raise ValueError("delta_grid must be strictly increasing")
        for name in ("tol_sca", "tol_ao", "zeta_dc"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")
        for name in ("max_iter_sca", "max_iter_ao", "max_iter_dc"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be a positive integer")
        if len(self.rate_thresholds) != 2 or any(r < 0 for r in self.rate_thresholds):
            raise ValueError("rate_thresholds must hold two non-negative rates")

    # -- geometry -----------------------------------------------------------
    def distance(self, a: str, b: str) -> float:
        """Euclidean distance in meters between two named nodes."""
        pos = {
            "bs": self.pos_bs,
            "ris": self.pos_ris,
            "near": self.pos_near,
            "far": self.pos_far,
        }
        return float(np.linalg.norm(np.asarray(pos[a]) - np.asarray(pos[b])))

    # -- serialization ------------------------------------------------------
    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        for derived in ("noise_power", "p_bs", "p_d2d", "rho0"):
            d.pop(derived)
        d["pos_bs"] = list(self.pos_bs)
        d["pos_ris"] = list(self.pos_ris)
        d["pos_near"] = list(self.pos_near)
        d["pos_far"] = list(self.pos_far)
        d["rate_thresholds"] = list(self.rate_thresholds)
        d["delta_grid"] = list(self.delta_grid)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SystemConfig":
        kwargs = dict(d)
        for key in ("pos_bs", "pos_ris", "pos_near", "pos_far"):
            if key in kwargs:
                kwargs[key] = tuple(float(x) for x in kwargs[key])
        if "rate_thresholds" in kwargs:
            kwargs["rate_thresholds"] = tuple(float(x) for x in kwargs["rate_thresholds"])
        if "delta_grid" in kwargs:
            kwargs["delta_grid"] = tuple(float(x) for x in kwargs["delta_grid"])
        return cls(**kwargs)

    @classmethod
    def from_yaml(cls, path: str | Path) -> "SystemConfig":
        with open(path) as f:
            data = yaml.safe_load(f)
        return cls.from_dict(data or {})

    def to_yaml(self, path: str | Path) -> None:
        with open(path, "w") as f:
            yaml.safe_dump(self.to_dict(), f, sort_keys=False)

    def replace(self, **changes) -> "SystemConfig":
        return dataclasses.replace(self, **changes)

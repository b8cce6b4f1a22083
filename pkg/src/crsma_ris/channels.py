"""Stochastic channel generation with distance-based path loss.

The BS-RIS and RIS-far links are Rician with a deterministic geometry-derived
line-of-sight component; every other link is Rayleigh.  All returned channels
carry their sqrt(path-loss) scaling, so downstream code never touches dB.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import SystemConfig, db_to_linear

REFERENCE_DISTANCE_M = 1.0


@dataclass
class ChannelSet:
    """One Monte Carlo realization of every wireless link in the model."""

    h_b1: np.ndarray      # (N_t,)  BS -> near
    h_b2: np.ndarray      # (N_t,)  BS -> far
    H_br: np.ndarray      # (N_t, M) BS -> RIS
    h_r1: np.ndarray      # (M,)    RIS -> near, slot 1
    h_r2: np.ndarray      # (M,)    RIS -> far, slot 1
    hhat_r2: np.ndarray   # (M,)    RIS -> far, slot 2
    h_1r: np.ndarray      # (M,)    near -> RIS, slot 2
    h_12: complex         # scalar  near -> far D2D

    @property
    def n_antennas(self) -> int:
        return self.h_b1.shape[0]

    @property
    def n_ris_elements(self) -> int:
        return self.h_r1.shape[0]

    def digest(self) -> str:
        """Stable hash of the realization, used for paired-comparison audits."""
        import hashlib

        h = hashlib.sha256()
        for arr in (self.h_b1, self.h_b2, self.H_br, self.h_r1, self.h_r2,
                    self.hhat_r2, self.h_1r, np.asarray([self.h_12])):
            h.update(np.ascontiguousarray(arr).tobytes())
        return h.hexdigest()


def path_loss(distance_m: float, exponent: float, rho0_db: float) -> float:
    """Linear power gain rho0 * d^(-exponent) at reference distance 1 m."""
    if distance_m <= 0:
        raise ValueError("distance must be strictly positive")
    return db_to_linear(rho0_db) * (distance_m / REFERENCE_DISTANCE_M) ** (-exponent)


def sample_rayleigh(rows: int, cols: int, pl: float, rng: np.random.Generator) -> np.ndarray:
    """I.i.d. circularly-symmetric complex Gaussian entries with variance pl."""
    if pl < 0:
        raise ValueError("path loss must be non-negative")
    g = (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2.0)
    return np.sqrt(pl) * g


def sample_rician(rows: int, cols: int, rician_factor: float, pl: float,
                  los_component: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Rician fading: sqrt(pl) * (LoS weighted by the K-factor + scattered part).

    The LoS term carries weight sqrt(K/(1+K)) and the scattered term
    sqrt(1/(1+K)), so the total mean power equals pl for unit-modulus LoS
    entries.
    """
    if rician_factor < 0:
        raise ValueError("rician_factor must be non-negative")
    los = np.asarray(los_component)
    if los.shape != (rows, cols):
        raise ValueError(f"los_component shape {los.shape} != ({rows}, {cols})")
    nlos = (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2.0)
    lam = rician_factor
    return np.sqrt(pl) * (np.sqrt(lam / (1.0 + lam)) * los + np.sqrt(1.0 / (1.0 + lam)) * nlos)


def steering_vector(n: int, cos_angle: float) -> np.ndarray:
    """Uniform linear array response, half-wavelength spacing."""
    return np.exp(1j * np.pi * np.arange(n) * cos_angle)


def _direction_cosine(src, dst, axis) -> float:
    d = np.asarray(dst, dtype=float) - np.asarray(src, dtype=float)
    return float(d @ np.asarray(axis) / np.linalg.norm(d))

# Array axes are a modeling choice (the LoS geometry is otherwise
# unspecified): both ULAs lie along the x axis.
_ARRAY_AXIS = (1.0, 0.0, 0.0)


def los_bs_to_ris(cfg: SystemConfig) -> np.ndarray:
    """Deterministic LoS component for the BS->RIS matrix (outer product of steering vectors)."""
    cos_b = _direction_cosine(cfg.pos_bs, cfg.pos_ris, _ARRAY_AXIS)
    cos_r = _direction_cosine(cfg.pos_ris, cfg.pos_bs, _ARRAY_AXIS)
    a_bs = steering_vector(cfg.n_antennas, cos_b)
    a_ris = steering_vector(cfg.n_ris_elements, cos_r)
    return np.outer(a_bs, a_ris.conj())


def los_ris_to_far(cfg: SystemConfig) -> np.ndarray:
    cos_r = _direction_cosine(cfg.pos_ris, cfg.pos_far, _ARRAY_AXIS)
    return steering_vector(cfg.n_ris_elements, cos_r)[:, None]


def generate_channels(cfg: SystemConfig, rng: np.random.Generator) -> ChannelSet:
    """Draw one full channel realization. Pure given (cfg, rng state)."""
    nt, m = cfg.n_antennas, cfg.n_ris_elements
    eta = cfg.pl_exponents
    pl_b1 = path_loss(cfg.distance("bs", "near"), eta["bn"], cfg.rho0_db)
    pl_b2 = path_loss(cfg.distance("bs", "far"), eta["bf"], cfg.rho0_db)
    pl_br = path_loss(cfg.distance("bs", "ris"), eta["br"], cfg.rho0_db)
    pl_r1 = path_loss(cfg.distance("ris", "near"), eta["nr"], cfg.rho0_db)
    pl_r2 = path_loss(cfg.distance("ris", "far"), eta["rf"], cfg.rho0_db)
    pl_1r = path_loss(cfg.distance("near", "ris"), eta["nr"], cfg.rho0_db)
    pl_12 = path_loss(cfg.distance("near", "far"), eta["nf"], cfg.rho0_db)

    h_b1 = sample_rayleigh(nt, 1, pl_b1, rng)[:, 0]
    h_b2 = sample_rayleigh(nt, 1, pl_b2, rng)[:, 0]
    if m > 0:
        H_br = sample_rician(nt, m, cfg.rician_factor, pl_br, los_bs_to_ris(cfg), rng)
        h_r1 = sample_rayleigh(m, 1, pl_r1, rng)[:, 0]
        los_rf = los_ris_to_far(cfg)
        h_r2 = sample_rician(m, 1, cfg.rician_factor, pl_r2, los_rf, rng)[:, 0]
        hhat_r2 = sample_rician(m, 1, cfg.rician_factor, pl_r2, los_rf, rng)[:, 0]
        h_1r = sample_rayleigh(m, 1, pl_1r, rng)[:, 0]
    else:
        H_br = np.zeros((nt, 0), dtype=complex)
        h_r1 = np.zeros(0, dtype=complex)
        h_r2 = np.zeros(0, dtype=complex)
        hhat_r2 = np.zeros(0, dtype=complex)
        h_1r = np.zeros(0, dtype=complex)
    h_12 = complex(sample_rayleigh(1, 1, pl_12, rng)[0, 0])
    return ChannelSet(h_b1=h_b1, h_b2=h_b2, H_br=H_br, h_r1=h_r1, h_r2=h_r2,
                      hhat_r2=hhat_r2, h_1r=h_1r, h_12=h_12)

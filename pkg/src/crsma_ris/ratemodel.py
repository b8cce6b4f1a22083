"""Deterministic SINR / rate / energy evaluation for the two-user C-RSMA model.

This module is the ground-truth oracle: every optimizer is validated against
the quantities computed here.  All rates are in bits/s/Hz (log base 2); all
powers in watts.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channels import ChannelSet
from .config import SystemConfig

RATE_MARGIN_TOL = 1e-6
POWER_MARGIN_TOL = 1e-9


@dataclass
class PhaseVector:
    """RIS phase configuration for one time slot."""

    theta: np.ndarray  # (M,) radians

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=float)

    @property
    def phases(self) -> np.ndarray:
        """Unit-modulus reflection coefficients e^{j theta}."""
        return np.exp(1j * self.theta)

    def __len__(self) -> int:
        return self.theta.shape[0]

    @classmethod
    def zeros(cls, m: int) -> "PhaseVector":
        return cls(np.zeros(m))

    @classmethod
    def random(cls, m: int, rng: np.random.Generator) -> "PhaseVector":
        return cls(rng.uniform(0.0, 2.0 * np.pi, m))


@dataclass
class PowerSolution:
    """Precoders, common-rate split, relay power, time-slot share."""

    p_c: np.ndarray
    p_1: np.ndarray
    p_2: np.ndarray
    c_split: np.ndarray  # (2,) non-negative portions of the common rate
    p_d: float
    delta: float

    def __post_init__(self):
        self.p_c = np.asarray(self.p_c, dtype=complex)
        self.p_1 = np.asarray(self.p_1, dtype=complex)
        self.p_2 = np.asarray(self.p_2, dtype=complex)
        self.c_split = np.asarray(self.c_split, dtype=float)

    @property
    def bs_power(self) -> float:
        return float(np.linalg.norm(self.p_1) ** 2 + np.linalg.norm(self.p_2) ** 2
                     + np.linalg.norm(self.p_c) ** 2)

    @classmethod
    def zeros(cls, n_antennas: int, delta: float = 1.0) -> "PowerSolution":
        z = np.zeros(n_antennas, dtype=complex)
        return cls(p_c=z.copy(), p_1=z.copy(), p_2=z.copy(),
                   c_split=np.zeros(2), p_d=0.0, delta=delta)


@dataclass
class RateReport:
    r_c1_slot1: float
    r_c2_slot1: float
    r_c2_slot2: float
    r_c2_ndf: float
    r_c: float
    r_p1: float
    r_p2: float
    user_totals: np.ndarray  # C_k + R_p,k
    energy: float


@dataclass
class FeasibilityReport:
    """Signed constraint margins; positive means satisfied with slack."""

    margins: dict = field(default_factory=dict)
    rates: RateReport | None = None

    def ok(self, rate_tol: float = RATE_MARGIN_TOL, power_tol: float = POWER_MARGIN_TOL) -> bool:
        power_keys = {"bs_budget", "relay_budget", "relay_nonneg"}
        for key, margin in self.margins.items():
            tol = power_tol if key in power_keys else rate_tol
            if margin < -tol:
                return False
        return True

    def worst(self) -> tuple[str, float]:
        key = min(self.margins, key=self.margins.get)
        return key, self.margins[key]


def effective_channel(h_direct: np.ndarray, h_ris: np.ndarray, theta: PhaseVector,
                      H_br: np.ndarray) -> np.ndarray:
    """Column form of the row vector h_direct^H + h_ris^H Theta H_br^H."""
    h_direct = np.asarray(h_direct)
    m = len(theta)
    if h_ris.shape[0] != m or H_br.shape[1] != m:
        raise ValueError("RIS-side dimensions inconsistent with phase vector")
    if m == 0:
        return h_direct.copy()
    # (h_ris^H diag(phi) H_br^H)^H = H_br diag(phi)^H h_ris
    return h_direct + H_br @ (theta.phases.conj() * h_ris)


def effective_channels(ch: ChannelSet, theta1: PhaseVector) -> tuple[np.ndarray, np.ndarray]:
    h1 = effective_channel(ch.h_b1, ch.h_r1, theta1, ch.H_br)
    h2 = effective_channel(ch.h_b2, ch.h_r2, theta1, ch.H_br)
    return h1, h2


def effective_d2d_channel(ch: ChannelSet, theta2: PhaseVector) -> complex:
    """Combined near->far channel in the cooperative slot: h_12 + hhat_r2^H Theta h_1r."""
    if len(theta2) == 0:
        return complex(ch.h_12)
    return complex(ch.h_12 + np.sum(ch.hhat_r2.conj() * theta2.phases * ch.h_1r))


def _received_power(h: np.ndarray, p: np.ndarray) -> float:
    return float(abs(np.vdot(h, p)) ** 2)


def sinr_common_slot1(user: int, ch: ChannelSet, theta1: PhaseVector,
                      sol: PowerSolution, noise: float) -> float:
    h = effective_channels(ch, theta1)[user - 1]
    num = _received_power(h, sol.p_c)
    den = _received_power(h, sol.p_1) + _received_power(h, sol.p_2) + noise
    return num / den


def sinr_private_slot1(user: int, ch: ChannelSet, theta1: PhaseVector,
                       sol: PowerSolution, noise: float) -> float:
    h = effective_channels(ch, theta1)[user - 1]
    own = sol.p_1 if user == 1 else sol.p_2
    other = sol.p_2 if user == 1 else sol.p_1
    return _received_power(h, own) / (_received_power(h, other) + noise)


def rate_common_slot2(ch: ChannelSet, theta2: PhaseVector, p_d: float,
                      delta: float, noise: float) -> float:
    g = effective_d2d_channel(ch, theta2)
    return (1.0 - delta) * np.log2(1.0 + abs(g) ** 2 * p_d / noise)


def rate_report(ch: ChannelSet, theta1: PhaseVector, theta2: PhaseVector,
                sol: PowerSolution, cfg: SystemConfig) -> RateReport:
    s1, s2 = cfg.noise_power, cfg.noise_power
    d = sol.delta
    r_c1 = d * np.log2(1.0 + sinr_common_slot1(1, ch, theta1, sol, s1))
    r_c2 = d * np.log2(1.0 + sinr_common_slot1(2, ch, theta1, sol, s2))
    r_c2_2 = rate_common_slot2(ch, theta2, sol.p_d, d, s2)
    r_c2_ndf = r_c2 + r_c2_2
    r_c = min(r_c1, r_c2_ndf)
    r_p1 = d * np.log2(1.0 + sinr_private_slot1(1, ch, theta1, sol, s1))
    r_p2 = d * np.log2(1.0 + sinr_private_slot1(2, ch, theta1, sol, s2))
    totals = sol.c_split + np.array([r_p1, r_p2])
    return RateReport(r_c1_slot1=r_c1, r_c2_slot1=r_c2, r_c2_slot2=r_c2_2,
                      r_c2_ndf=r_c2_ndf, r_c=r_c, r_p1=r_p1, r_p2=r_p2,
                      user_totals=totals, energy=total_energy(sol))


def common_rate(ch: ChannelSet, theta1: PhaseVector, theta2: PhaseVector,
                sol: PowerSolution, noises: tuple[float, float]) -> float:
    d = sol.delta
    r_c1 = d * np.log2(1.0 + sinr_common_slot1(1, ch, theta1, sol, noises[0]))
    r_c2 = d * np.log2(1.0 + sinr_common_slot1(2, ch, theta1, sol, noises[1]))
    return min(r_c1, r_c2 + rate_common_slot2(ch, theta2, sol.p_d, d, noises[1]))


def total_energy(sol: PowerSolution) -> float:
    return sol.delta * sol.bs_power + (1.0 - sol.delta) * sol.p_d


def check_feasibility(sol: PowerSolution, ch: ChannelSet, theta1: PhaseVector,
                      theta2: PhaseVector, cfg: SystemConfig) -> FeasibilityReport:
    """Signed margins for every constraint of the original problem."""
    report = rate_report(ch, theta1, theta2, sol, cfg)
    margins = {
        "bs_budget": cfg.p_bs - sol.bs_power,
        "relay_budget": cfg.p_d2d - sol.p_d,
        "relay_nonneg": sol.p_d,
        "c_nonneg": float(np.min(sol.c_split)),
        "qos_1": report.user_totals[0] - cfg.rate_thresholds[0],
        "qos_2": report.user_totals[1] - cfg.rate_thresholds[1],
        "common_split": report.r_c - float(np.sum(sol.c_split)),
        "unit_modulus_1": -float(np.max(np.abs(np.abs(theta1.phases) - 1.0), initial=0.0)),
        "unit_modulus_2": -float(np.max(np.abs(np.abs(theta2.phases) - 1.0), initial=0.0)),
    }
    return FeasibilityReport(margins=margins, rates=report)

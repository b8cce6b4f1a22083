"""Alternating optimization driver: power step, phase step, slot-share search.

For each candidate slot share the driver alternates the SCA power step with
the lifted phase step until the energy stalls, then picks the slot share with
the lowest energy.  Slot-2 phases are closed form and computed once per
channel draw.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import phaseopt, ratemodel, scapower
from .channels import ChannelSet
from .config import SystemConfig
from .phaseopt import ExtractionFailure, PhaseStepInfeasible
from .ratemodel import PhaseVector, PowerSolution

_PHASE_ACCEPT_TOL = 1e-6


@dataclass
class AoTraceRecord:
    iteration: int
    eta: float
    dc_residual: float | None
    sca_iterations: int
    phase_accepted: bool


@dataclass
class AoDeltaResult:
    """Outcome of the alternation at one fixed slot share."""

    delta: float
    feasible: bool
    energy: float = math.inf
    solution: PowerSolution | None = None
    theta1: PhaseVector | None = None
    theta2: PhaseVector | None = None
    initial_theta1: PhaseVector | None = None
    converged: bool = False
    trace: list = field(default_factory=list)


@dataclass
class AOResult:
    best_delta: float
    energy_watts: float
    solution: PowerSolution | None
    theta1: PhaseVector | None
    theta2: PhaseVector | None
    delta_table: dict
    per_delta: dict
    feasible: bool
    seed: int | None = None

    def trace(self, delta: float | None = None) -> list:
        key = self.best_delta if delta is None else delta
        return self.per_delta[key].trace


def _phase_step(ch: ChannelSet, sol: PowerSolution, theta1: PhaseVector,
                cfg: SystemConfig) -> tuple[PhaseVector, float | None, bool]:
    """One lifted phase update; keeps the incumbent on any failure."""
    lp = phaseopt.build_lifted_problem(ch, sol, cfg)
    v0 = phaseopt.rank_one_lift(theta1)
    try:
        lifted = phaseopt.dc_rank_one_solve(lp, v0, cfg)
        if lifted.dc_residual > cfg.zeta_dc:
            return theta1, lifted.dc_residual, False
        candidate = phaseopt.extract_phases(lifted)
    except (PhaseStepInfeasible, ExtractionFailure):
        return theta1, None, False
    margins = [tc.margin(phaseopt.rank_one_lift(candidate))
               for tc in lp.trace_constraints()]
    if min(margins) < -_PHASE_ACCEPT_TOL:
        return theta1, lifted.dc_residual, False
    return candidate, lifted.dc_residual, True


def ao_solve(ch: ChannelSet, delta: float, cfg: SystemConfig,
             initial_theta1: PhaseVector,
             relay_enabled: bool = True) -> AoDeltaResult:
    """Alternate power and phase steps at a fixed slot share."""
    if not 0.0 < delta <= 1.0:
        raise ValueError("delta must lie in (0, 1]")
    theta2 = phaseopt.closed_form_theta2(ch.h_12, ch.h_1r, ch.hhat_r2)
    theta1 = initial_theta1
    result = AoDeltaResult(delta=delta, feasible=False,
                           initial_theta1=initial_theta1, theta2=theta2)

    warm = None
    eta_prev = math.inf
    sol = None
    for i in range(1, cfg.max_iter_ao + 1):
        sca = scapower.sca_solve(ch, theta1, theta2, delta, cfg,
                                 relay_enabled=relay_enabled, initial=warm)
        if not sca.feasible:
            if i == 1:
                return result
            break  # keep the last accepted bundle
        sol = sca.solution
        eta = ratemodel.total_energy(sol)
        record = AoTraceRecord(iteration=i, eta=eta, dc_residual=None,
                               sca_iterations=sca.iterations, phase_accepted=False)
        result.trace.append(record)
        if abs(eta_prev - eta) <= cfg.tol_ao or ch.n_ris_elements == 0:
            result.converged = True
            break
        eta_prev = eta
        theta_new, residual, accepted = _phase_step(ch, sol, theta1, cfg)
        record.dc_residual = residual
        record.phase_accepted = accepted
        theta1 = theta_new
        warm = scapower.iterate_from_solution(ch, theta1, theta2, sol, cfg)

    if sol is None:
        return result
    result.feasible = True
    result.energy = ratemodel.total_energy(sol)
    result.solution = sol
    result.theta1 = theta1
    return result


def delta_search(ch: ChannelSet, cfg: SystemConfig,
                 relay_enabled: bool = True,
                 delta_grid: tuple | None = None,
                 rng_seed: int | None = None) -> AOResult:
    """Exhaustive slot-share search: run the alternation per grid point.

    The first grid point starts from seeded random phases; later grid points
    warm-start from the previous point's phases.
    """
    grid = tuple(delta_grid) if delta_grid is not None else cfg.delta_grid
    seed = cfg.rng_seed if rng_seed is None else rng_seed
    rng = np.random.default_rng(seed)
    theta_init = PhaseVector.random(ch.n_ris_elements, rng)

    per_delta: dict[float, AoDeltaResult] = {}
    table: dict[float, float] = {}
    for delta in grid:
        res = ao_solve(ch, delta, cfg, theta_init, relay_enabled=relay_enabled)
        per_delta[delta] = res
        table[delta] = res.energy if res.feasible else math.inf
        if res.feasible and res.theta1 is not None and len(res.theta1) > 0:
            theta_init = res.theta1

    best_delta = min(table, key=lambda d: (table[d], d))
    best = per_delta[best_delta]
    return AOResult(best_delta=best_delta, energy_watts=table[best_delta],
                    solution=best.solution, theta1=best.theta1,
                    theta2=best.theta2, delta_table=table, per_delta=per_delta,
                    feasible=any(math.isfinite(v) for v in table.values()),
                    seed=seed)

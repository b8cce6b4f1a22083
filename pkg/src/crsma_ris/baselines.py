"""Benchmark schemes sharing the rate-model / power-step / phase-step parts.

The RSMA-based schemes reuse the main pipeline directly.  The NOMA schemes
are reconstructed from the standard two-user MISO downlink with superposition
coding and SIC at the near user: the far user decodes its own message with
the near-user signal as noise; the near user first decodes the far message,
then its own.  The cooperative variant relays the far message in slot 2 over
the same device-to-device path as the main scheme.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import cvxpy as cp
import numpy as np

from . import aodriver, conic, phaseopt, ratemodel, scapower
from .aodriver import AOResult, AoDeltaResult, AoTraceRecord
from .channels import ChannelSet
from .conic import ConicProgram, NumericalFailure, SolveStatus
from .config import SystemConfig
from .phaseopt import ExtractionFailure, PhaseStepInfeasible, TraceConstraint
from .ratemodel import PhaseVector

LN2 = math.log(2.0)


class SchemeId(enum.Enum):
    CRSMA_RIS = "crsma-ris"
    RSMA_RIS = "rsma-ris"
    NOMA_RIS = "noma-ris"
    CNOMA_RIS = "cnoma-ris"
    CRSMA_NORIS = "crsma-noris"
    CNOMA_NORIS = "cnoma-noris"


def strip_ris(ch: ChannelSet) -> ChannelSet:
    """Same direct links, RIS removed (for the no-RIS benchmark variants)."""
    nt = ch.n_antennas
    empty = np.zeros(0, dtype=complex)
    return ChannelSet(h_b1=ch.h_b1.copy(), h_b2=ch.h_b2.copy(),
                      H_br=np.zeros((nt, 0), dtype=complex),
                      h_r1=empty.copy(), h_r2=empty.copy(),
                      hhat_r2=empty.copy(), h_1r=empty.copy(), h_12=ch.h_12)


# ---------------------------------------------------------------------------
# NOMA rate oracle


@dataclass
class NomaSolution:
    """Superposition precoders, relay power, time-slot share."""

    w_1: np.ndarray
    w_2: np.ndarray
    p_d: float
    delta: float

    def __post_init__(self):
        self.w_1 = np.asarray(self.w_1, dtype=complex)
        self.w_2 = np.asarray(self.w_2, dtype=complex)

    @property
    def bs_power(self) -> float:
        return float(np.linalg.norm(self.w_1) ** 2 + np.linalg.norm(self.w_2) ** 2)


@dataclass
class NomaRateReport:
    r_near: float          # near user's own rate, slot 1
    r_far_decode: float    # far message decoded at the near user, slot 1
    r_far_slot1: float     # far message at the far user, slot 1
    r_far_slot2: float
    r_far_total: float
    energy: float


def noma_total_energy(sol: NomaSolution) -> float:
    return sol.delta * sol.bs_power + (1.0 - sol.delta) * sol.p_d


def noma_rate_report(ch: ChannelSet, theta1: PhaseVector, theta2: PhaseVector,
                     sol: NomaSolution, cfg: SystemConfig) -> NomaRateReport:
    h1, h2 = ratemodel.effective_channels(ch, theta1)
    noise = cfg.noise_power
    d = sol.delta

    def pw(h, w):
        return abs(np.vdot(h, w)) ** 2

    sinr_nn = pw(h1, sol.w_1) / noise
    sinr_fn = pw(h1, sol.w_2) / (pw(h1, sol.w_1) + noise)
    sinr_ff = pw(h2, sol.w_2) / (pw(h2, sol.w_1) + noise)
    r_slot2 = ratemodel.rate_common_slot2(ch, theta2, sol.p_d, d, noise)
    r_far_slot1 = d * np.log2(1.0 + sinr_ff)
    return NomaRateReport(r_near=d * np.log2(1.0 + sinr_nn),
                          r_far_decode=d * np.log2(1.0 + sinr_fn),
                          r_far_slot1=r_far_slot1,
                          r_far_slot2=r_slot2,
                          r_far_total=r_far_slot1 + r_slot2,
                          energy=noma_total_energy(sol))


def noma_check_feasibility(sol: NomaSolution, ch: ChannelSet, theta1: PhaseVector,
                           theta2: PhaseVector, cfg: SystemConfig) -> ratemodel.FeasibilityReport:
    """Signed margins for the NOMA constraint set (SIC decodability included)."""
    report = noma_rate_report(ch, theta1, theta2, sol, cfg)
    rth1, rth2 = cfg.rate_thresholds
    margins = {
        "bs_budget": cfg.p_bs - sol.bs_power,
        "relay_budget": cfg.p_d2d - sol.p_d,
        "relay_nonneg": sol.p_d,
        "qos_1": report.r_near - rth1,
        "qos_2": report.r_far_total - rth2,
        "sic_decode": report.r_far_decode - rth2,
        "unit_modulus_1": -float(np.max(np.abs(np.abs(theta1.phases) - 1.0), initial=0.0)),
        "unit_modulus_2": -float(np.max(np.abs(np.abs(theta2.phases) - 1.0), initial=0.0)),
    }
    out = ratemodel.FeasibilityReport(margins=margins)
    out.rates = report
    return out


# ---------------------------------------------------------------------------
# NOMA power step (SCA mirror of the main scheme's sub-problem 1)


@dataclass
class NomaIterate:
    w_1: np.ndarray
    w_2: np.ndarray
    p_d: float
    beta_ff: float
    beta_fn: float
    eta: float


class _NomaTemplate:
    """Parametric convex program for one NOMA SCA step."""

    def __init__(self, nt: int):
        prog = ConicProgram()
        w_1 = prog.add_variable("w_1", nt, complex=True)
        w_2 = prog.add_variable("w_2", nt, complex=True)
        p_d = prog.add_variable("p_d", nonneg=True)
        g_ff = prog.add_variable("g_ff", nonneg=True)
        g_fn = prog.add_variable("g_fn", nonneg=True)
        g_nn = prog.add_variable("g_nn", nonneg=True)
        b_ff = prog.add_variable("b_ff", nonneg=True)
        b_fn = prog.add_variable("b_fn", nonneg=True)
        t_bs = prog.add_variable("t_bs", nonneg=True)
        z = prog.add_variable("z", nonneg=True)
        slack = prog.add_variable("slack", nonneg=True)

        h1 = prog.add_parameter("h1", nt, complex=True)
        h2 = prog.add_parameter("h2", nt, complex=True)
        delta = prog.add_parameter("delta", nonneg=True)
        omd_w = prog.add_parameter("omd_w", nonneg=True)
        ratio = prog.add_parameter("ratio", nonneg=True)
        rth1_d = prog.add_parameter("rth1_over_delta", nonneg=True)
        rth2_d = prog.add_parameter("rth2_over_delta", nonneg=True)
        w_ff = prog.add_parameter("w_ff", nt, complex=True)
        w_fn = prog.add_parameter("w_fn", nt, complex=True)
        w_nn = prog.add_parameter("w_nn", nt, complex=True)
        s_ff = prog.add_parameter("s_ff", nonneg=True)
        s_fn = prog.add_parameter("s_fn", nonneg=True)
        c_nn = prog.add_parameter("c_nn", nonneg=True)
        g2 = prog.add_parameter("g2", nonneg=True)
        pbs = prog.add_parameter("pbs", nonneg=True)
        pd2d = prog.add_parameter("pd2d", nonneg=True)
        s_weight = prog.add_parameter("slack_weight", nonneg=True)
        s_max = prog.add_parameter("slack_max", nonneg=True)

        prog.add_constraint(cp.real(cp.conj(w_ff) @ w_2) - s_ff * b_ff >= g_ff)
        prog.add_constraint(cp.real(cp.conj(w_fn) @ w_2) - s_fn * b_fn >= g_fn)
        # near user's own stream sees no interference after SIC; denominator
        # is the unit (normalized) noise, so the bound has a constant slope
        prog.add_constraint(cp.real(cp.conj(w_nn) @ w_1) - c_nn >= g_nn)
        prog.add_constraint(b_ff >= cp.square(cp.abs(cp.conj(h2) @ w_1)) + 1.0, "soc")
        prog.add_constraint(b_fn >= cp.square(cp.abs(cp.conj(h1) @ w_1)) + 1.0, "soc")
        prog.add_constraint(cp.log1p(g_nn) / LN2 >= rth1_d - slack, "exp")
        prog.add_constraint(cp.log1p(g_fn) / LN2 >= rth2_d - slack, "exp")
        prog.add_constraint(cp.log1p(g_ff) / LN2 + ratio * cp.log1p(z) / LN2
                            >= rth2_d - slack, "exp")
        prog.add_constraint(z <= g2 * p_d)
        prog.add_constraint(t_bs >= cp.sum_squares(w_1) + cp.sum_squares(w_2), "soc")
        prog.add_constraint(t_bs <= pbs)
        prog.add_constraint(p_d <= pd2d)
        prog.add_constraint(slack <= s_max)
        prog.minimize(delta * t_bs + omd_w * p_d + s_weight * slack)
        assert prog.problem().is_dcp(dpp=True)
        self.prog = prog

    def set_instance(self, h1n, h2n, delta, g2, cfg: SystemConfig, relay_enabled: bool):
        p = self.prog.parameters
        p["h1"].value = h1n
        p["h2"].value = h2n
        p["delta"].value = delta
        p["omd_w"].value = 1.0 - delta
        p["ratio"].value = (1.0 - delta) / delta
        p["rth1_over_delta"].value = cfg.rate_thresholds[0] / delta
        p["rth2_over_delta"].value = cfg.rate_thresholds[1] / delta
        p["g2"].value = g2
        p["pbs"].value = cfg.p_bs
        # no slot 2 at delta == 1, so pin the relay budget to keep the
        # program identical to the relay-disabled one
        p["pd2d"].value = cfg.p_d2d if (relay_enabled and delta < 1.0) else 0.0
        p["slack_weight"].value = 0.0
        p["slack_max"].value = 0.0

    def set_linearization(self, h1n, h2n, it: NomaIterate):
        p = self.prog.parameters
        bnd_ff = scapower.lower_bound_approx(None, None, it.beta_ff,
                                             complex(np.vdot(h2n, it.w_2)))
        bnd_fn = scapower.lower_bound_approx(None, None, it.beta_fn,
                                             complex(np.vdot(h1n, it.w_2)))
        v_nn = complex(np.vdot(h1n, it.w_1))
        p["w_ff"].value = bnd_ff.grad_v * h2n
        p["s_ff"].value = -bnd_ff.grad_u
        p["w_fn"].value = bnd_fn.grad_v * h1n
        p["s_fn"].value = -bnd_fn.grad_u
        p["w_nn"].value = 2.0 * v_nn * h1n
        p["c_nn"].value = abs(v_nn) ** 2

    def set_restoration(self, enabled: bool):
        p = self.prog.parameters
        p["slack_weight"].value = 1.0 if enabled else 0.0
        p["slack_max"].value = 1e3 if enabled else 0.0
        if enabled:
            p["delta"].value = 0.0
            p["omd_w"].value = 0.0


_NOMA_TEMPLATES: dict[int, _NomaTemplate] = {}


def _noma_template(nt: int) -> _NomaTemplate:
    if nt not in _NOMA_TEMPLATES:
        _NOMA_TEMPLATES[nt] = _NomaTemplate(nt)
    return _NOMA_TEMPLATES[nt]


def _noma_betas(h1n, h2n, w_1):
    def pw(h, w):
        return abs(np.vdot(h, w)) ** 2
    return pw(h2n, w_1) + 1.0, pw(h1n, w_1) + 1.0


def _noma_eta(delta, w_1, w_2, p_d):
    return delta * (np.linalg.norm(w_1) ** 2 + np.linalg.norm(w_2) ** 2) \
        + (1.0 - delta) * p_d


def _noma_extract(prog: ConicProgram, delta, h1n, h2n, relay_enabled) -> NomaIterate:
    v = {name: var.value for name, var in prog.variables.items()}
    w_1, w_2 = np.asarray(v["w_1"]), np.asarray(v["w_2"])
    p_d = float(v["p_d"]) if relay_enabled and delta < 1.0 else 0.0
    p_d = max(p_d, 0.0)
    beta_ff, beta_fn = _noma_betas(h1n, h2n, w_1)
    return NomaIterate(w_1=w_1, w_2=w_2, p_d=p_d, beta_ff=beta_ff,
                       beta_fn=beta_fn, eta=_noma_eta(delta, w_1, w_2, p_d))


def noma_iterate_from_solution(ch, theta1, theta2, sol: NomaSolution,
                               cfg) -> NomaIterate:
    h1n, h2n, _ = scapower._normalized_inputs(ch, theta1, theta2, cfg)
    beta_ff, beta_fn = _noma_betas(h1n, h2n, sol.w_1)
    return NomaIterate(w_1=sol.w_1.copy(), w_2=sol.w_2.copy(), p_d=sol.p_d,
                       beta_ff=beta_ff, beta_fn=beta_fn,
                       eta=_noma_eta(sol.delta, sol.w_1, sol.w_2, sol.p_d))


def noma_initial_point(ch, theta1, theta2, delta, cfg,
                       relay_enabled=True) -> NomaIterate | None:
    """Matched-filter start at full budget, with slack restoration if needed."""
    h1, h2 = ratemodel.effective_channels(ch, theta1)
    h1n, h2n, g2 = scapower._normalized_inputs(ch, theta1, theta2, cfg)
    nt = ch.n_antennas
    share = math.sqrt(cfg.p_bs / 2.0) * (1.0 - 1e-6)

    def mrt(h):
        n = np.linalg.norm(h)
        return share * h / n if n > 0 else np.zeros(nt, dtype=complex)

    w_1, w_2 = mrt(h1), mrt(h2)
    p_d = cfg.p_d2d if (relay_enabled and delta < 1.0) else 0.0
    beta_ff, beta_fn = _noma_betas(h1n, h2n, w_1)
    it = NomaIterate(w_1=w_1, w_2=w_2, p_d=p_d, beta_ff=beta_ff,
                     beta_fn=beta_fn, eta=_noma_eta(delta, w_1, w_2, p_d))
    sol = NomaSolution(w_1=w_1, w_2=w_2, p_d=p_d, delta=delta)
    if noma_check_feasibility(sol, ch, theta1, theta2, cfg).ok():
        return it

    tmpl = _noma_template(nt)
    prev_slack = np.inf
    for n in range(1, 16):
        tmpl.set_instance(h1n, h2n, delta, g2, cfg, relay_enabled)
        tmpl.set_linearization(h1n, h2n, it)
        tmpl.set_restoration(True)
        out = conic.solve(tmpl.prog, accuracy=1e-8)
        tmpl.set_restoration(False)
        if out.status is SolveStatus.NUMERICAL_FAILURE:
            raise NumericalFailure("noma-restoration", n)
        if out.status is not SolveStatus.OPTIMAL:
            return None
        slack = float(tmpl.prog.variables["slack"].value)
        it = _noma_extract(tmpl.prog, delta, h1n, h2n, relay_enabled)
        if slack <= 1e-7:
            return it
        if prev_slack - slack <= 1e-8:
            return None
        prev_slack = slack
    return None


def noma_sca_solve(ch, theta1, theta2, delta, cfg, relay_enabled=True,
                   initial: NomaIterate | None = None) -> scapower.ScaResult:
    """NOMA power step: same SCA loop shape as the main scheme."""
    if not 0.0 < delta <= 1.0:
        raise ValueError("delta must lie in (0, 1]")
    h1n, h2n, g2 = scapower._normalized_inputs(ch, theta1, theta2, cfg)
    it = initial if initial is not None else noma_initial_point(
        ch, theta1, theta2, delta, cfg, relay_enabled)
    if it is None:
        return scapower.ScaResult(feasible=False, solution=None)

    tmpl = _noma_template(ch.n_antennas)
    trace = []
    eta_prev = it.eta
    converged = False
    n = 0
    for n in range(1, cfg.max_iter_sca + 1):
        tmpl.set_instance(h1n, h2n, delta, g2, cfg, relay_enabled)
        tmpl.set_linearization(h1n, h2n, it)
        out = conic.solve(tmpl.prog, accuracy=1e-8)
        if out.status is SolveStatus.NUMERICAL_FAILURE:
            raise NumericalFailure("noma-sca", n)
        if out.status is not SolveStatus.OPTIMAL:
            break
        it = _noma_extract(tmpl.prog, delta, h1n, h2n, relay_enabled)
        sol = NomaSolution(w_1=it.w_1, w_2=it.w_2, p_d=it.p_d, delta=delta)
        report = noma_check_feasibility(sol, ch, theta1, theta2, cfg)
        trace.append(scapower.ScaTraceRecord(
            iteration=n, eta=it.eta, solver_status=out.status.value,
            max_violation=-min(0.0, report.worst()[1])))
        if abs(eta_prev - it.eta) <= cfg.tol_sca:
            converged = True
            break
        eta_prev = it.eta

    sol = NomaSolution(w_1=it.w_1.copy(), w_2=it.w_2.copy(), p_d=it.p_d,
                       delta=delta)
    return scapower.ScaResult(feasible=True, solution=sol, trace=trace,
                              iterations=n, converged=converged)


# ---------------------------------------------------------------------------
# NOMA phase step and alternation


def noma_lifted_constraints(ch: ChannelSet, sol: NomaSolution,
                            cfg: SystemConfig) -> list[TraceConstraint]:
    """Lifted slot-1 SINR constraints for the NOMA schemes."""
    delta = sol.delta
    if delta <= 0:
        raise ValueError("slot-1 duration must be positive")
    theta2 = phaseopt.closed_form_theta2(ch.h_12, ch.h_1r, ch.hhat_r2)
    r_slot2 = ratemodel.rate_common_slot2(ch, theta2, sol.p_d, delta,
                                          cfg.noise_power)
    rth1, rth2 = cfg.rate_thresholds
    mu_ff = 2.0 ** ((rth2 - r_slot2) / delta) - 1.0
    mu_fn = 2.0 ** (rth2 / delta) - 1.0
    mu_nn = 2.0 ** (rth1 / delta) - 1.0
    ab = {}
    for k, (direct, ris) in {1: (ch.h_b1, ch.h_r1), 2: (ch.h_b2, ch.h_r2)}.items():
        for sig, w in (("w1", sol.w_1), ("w2", sol.w_2)):
            ab[(k, sig)] = phaseopt._lift_coefficients(direct, ris, ch.H_br, w)
    noise = cfg.noise_power
    out = []
    specs = [("far_own", (2, "w2"), [(2, "w1")], mu_ff),
             ("sic_decode", (1, "w2"), [(1, "w1")], mu_fn),
             ("near_own", (1, "w1"), [], mu_nn)]
    for label, sig_key, interferers, mu in specs:
        a, b = ab[sig_key]
        A = phaseopt._lift_matrix(a, b)
        rhs = mu * noise - abs(b) ** 2
        for ikey in interferers:
            ai, bi = ab[ikey]
            A -= mu * phaseopt._lift_matrix(ai, bi)
            rhs += mu * abs(bi) ** 2
        scale = max(np.linalg.norm(A), abs(rhs), 1e-300)
        out.append(TraceConstraint(A=A / scale, rhs=rhs / scale, label=label))
    return out


def _noma_phase_step(ch, sol, theta1, cfg):
    cons = noma_lifted_constraints(ch, sol, cfg)
    v0 = phaseopt.rank_one_lift(theta1)
    try:
        lifted = phaseopt.dc_solve(cons, v0, cfg)
        if lifted.dc_residual > cfg.zeta_dc:
            return theta1, lifted.dc_residual, False
        candidate = phaseopt.extract_phases(lifted)
    except (PhaseStepInfeasible, ExtractionFailure):
        return theta1, None, False
    margins = [tc.margin(phaseopt.rank_one_lift(candidate)) for tc in cons]
    if min(margins) < -1e-6:
        return theta1, lifted.dc_residual, False
    return candidate, lifted.dc_residual, True


def noma_ao_solve(ch, delta, cfg, initial_theta1,
                  relay_enabled=True) -> AoDeltaResult:
    """NOMA alternation at fixed slot share, mirroring the main driver."""
    theta2 = phaseopt.closed_form_theta2(ch.h_12, ch.h_1r, ch.hhat_r2)
    theta1 = initial_theta1
    result = AoDeltaResult(delta=delta, feasible=False,
                           initial_theta1=initial_theta1, theta2=theta2)
    warm = None
    eta_prev = math.inf
    sol = None
    for i in range(1, cfg.max_iter_ao + 1):
        sca = noma_sca_solve(ch, theta1, theta2, delta, cfg,
                             relay_enabled=relay_enabled, initial=warm)
        if not sca.feasible:
            if i == 1:
                return result
            break
        sol = sca.solution
        eta = noma_total_energy(sol)
        record = AoTraceRecord(iteration=i, eta=eta, dc_residual=None,
                               sca_iterations=sca.iterations, phase_accepted=False)
        result.trace.append(record)
        if abs(eta_prev - eta) <= cfg.tol_ao or ch.n_ris_elements == 0:
            result.converged = True
            break
        eta_prev = eta
        theta1, residual, accepted = _noma_phase_step(ch, sol, theta1, cfg)
        record.dc_residual = residual
        record.phase_accepted = accepted
        warm = noma_iterate_from_solution(ch, theta1, theta2, sol, cfg)

    if sol is None:
        return result
    result.feasible = True
    result.energy = noma_total_energy(sol)
    result.solution = sol
    result.theta1 = theta1
    return result


def noma_delta_search(ch, cfg, relay_enabled=True, delta_grid=None,
                      rng_seed=None) -> AOResult:
    grid = tuple(delta_grid) if delta_grid is not None else cfg.delta_grid
    seed = cfg.rng_seed if rng_seed is None else rng_seed
    rng = np.random.default_rng(seed)
    theta_init = PhaseVector.random(ch.n_ris_elements, rng)

    per_delta, table = {}, {}
    for delta in grid:
        res = noma_ao_solve(ch, delta, cfg, theta_init,
                            relay_enabled=relay_enabled)
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


# ---------------------------------------------------------------------------
# Scheme dispatch


def solve_rsma_ris(ch: ChannelSet, cfg: SystemConfig) -> AOResult:
    """Proposal pipeline with the cooperative slot removed."""
    return aodriver.delta_search(ch, cfg, relay_enabled=False, delta_grid=(1.0,))


def solve_noma_ris(ch: ChannelSet, cfg: SystemConfig) -> AOResult:
    return noma_delta_search(ch, cfg, relay_enabled=False, delta_grid=(1.0,))


def solve_cnoma_ris(ch: ChannelSet, cfg: SystemConfig) -> AOResult:
    return noma_delta_search(ch, cfg)


def solve_crsma_noris(ch: ChannelSet, cfg: SystemConfig) -> AOResult:
    return aodriver.delta_search(strip_ris(ch), cfg)


def solve_cnoma_noris(ch: ChannelSet, cfg: SystemConfig) -> AOResult:
    return noma_delta_search(strip_ris(ch), cfg)


_DISPATCH = {
    SchemeId.CRSMA_RIS: lambda ch, cfg: aodriver.delta_search(ch, cfg),
    SchemeId.RSMA_RIS: solve_rsma_ris,
    SchemeId.NOMA_RIS: solve_noma_ris,
    SchemeId.CNOMA_RIS: solve_cnoma_ris,
    SchemeId.CRSMA_NORIS: solve_crsma_noris,
    SchemeId.CNOMA_NORIS: solve_cnoma_noris,
}

_NOMA_SCHEMES = {SchemeId.NOMA_RIS, SchemeId.CNOMA_RIS, SchemeId.CNOMA_NORIS}
_NORIS_SCHEMES = {SchemeId.CRSMA_NORIS, SchemeId.CNOMA_NORIS}


def solve_scheme(scheme: SchemeId, ch: ChannelSet, cfg: SystemConfig) -> AOResult:
    return _DISPATCH[scheme](ch, cfg)


def audit_solution(scheme: SchemeId, res: AOResult, ch: ChannelSet,
                   cfg: SystemConfig) -> ratemodel.FeasibilityReport:
    """Scheme-specific feasibility audit of a returned solution."""
    if not res.feasible:
        raise ValueError("cannot audit an infeasible result")
    if scheme in _NORIS_SCHEMES:
        ch = strip_ris(ch)
    if scheme in _NOMA_SCHEMES:
        return noma_check_feasibility(res.solution, ch, res.theta1,
                                      res.theta2, cfg)
    return ratemodel.check_feasibility(res.solution, ch, res.theta1,
                                       res.theta2, cfg)

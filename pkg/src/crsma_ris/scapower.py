"""Sub-problem 1: precoders, common-rate split and relay power for fixed phases.

The non-convex SINR constraints are handled by the classic quadratic-over-
linear lower bound, giving a convex conic program per iteration; the concave
log terms ride on the exponential cone.  The program is built once per antenna
count as a parametric template, so the SCA loop only updates parameter values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import cvxpy as cp
import numpy as np

from . import conic, ratemodel
from .channels import ChannelSet
from .conic import ConicProgram, NumericalFailure, SolveStatus
from .config import SystemConfig
from .ratemodel import PhaseVector, PowerSolution

LN2 = math.log(2.0)

# restoration-phase settings
_RESTORE_SLACK_MAX = 1e3
_RESTORE_MAX_ITER = 15
_RESTORE_FEAS_TOL = 1e-7


@dataclass
class AffineBound:
    """Concave global under-estimator of |v|^2 / u, tight at (u_n, v_n).

    bound(u, v) = Re{conj(grad_v) . v} + grad_u * u
    with grad_v = 2 v_n / u_n and grad_u = -|v_n|^2 / u_n^2.
    """

    grad_v: np.ndarray | complex
    grad_u: float

    def evaluate(self, u: float, v) -> float:
        return float(np.real(np.vdot(np.atleast_1d(self.grad_v), np.atleast_1d(v)))
                     + self.grad_u * u)


def lower_bound_approx(u, v, u_n, v_n) -> AffineBound:
    """Coefficients of the affine lower bound of |v|^2/u at (u_n, v_n).

    The (u, v) arguments fix the shape contract; only the expansion point
    enters the coefficients.
    """
    if u_n <= 0:
        raise ValueError("expansion point u_n must be strictly positive")
    v_n = np.asarray(v_n, dtype=complex)
    grad_v = 2.0 * v_n / u_n
    grad_u = -float(np.vdot(v_n, v_n).real) / u_n ** 2
    if v_n.ndim == 0:
        grad_v = complex(grad_v)
    return AffineBound(grad_v=grad_v, grad_u=grad_u)


@dataclass
class ScaIterate:
    """One accepted SCA iterate: precoders plus the slack state used to re-linearize."""

    p_c: np.ndarray
    p_1: np.ndarray
    p_2: np.ndarray
    p_d: float
    c_split: np.ndarray
    beta_p: np.ndarray   # (2,) interference-plus-noise, noise-normalized
    beta_c: np.ndarray
    gamma_p: np.ndarray
    gamma_c: np.ndarray
    eta: float


@dataclass
class ScaTraceRecord:
    iteration: int
    eta: float
    solver_status: str
    max_violation: float


@dataclass
class ScaResult:
    feasible: bool
    solution: PowerSolution | None
    trace: list = field(default_factory=list)
    iterations: int = 0
    converged: bool = False


class _PowerTemplate:
    """Parametric convex program for one SCA step, cached per antenna count."""

    def __init__(self, nt: int):
        self.nt = nt
        prog = ConicProgram()
        p_c = prog.add_variable("p_c", nt, complex=True)
        p_1 = prog.add_variable("p_1", nt, complex=True)
        p_2 = prog.add_variable("p_2", nt, complex=True)
        c = prog.add_variable("c", 2, nonneg=True)
        p_d = prog.add_variable("p_d", nonneg=True)
        g_p = prog.add_variable("gamma_p", 2, nonneg=True)
        g_c = prog.add_variable("gamma_c", 2, nonneg=True)
        b_p = prog.add_variable("beta_p", 2, nonneg=True)
        b_c = prog.add_variable("beta_c", 2, nonneg=True)
        t_bs = prog.add_variable("t_bs", nonneg=True)
        z = prog.add_variable("z", nonneg=True)
        slack = prog.add_variable("slack", nonneg=True)

        h1 = prog.add_parameter("h1", nt, complex=True)
        h2 = prog.add_parameter("h2", nt, complex=True)
        inv_delta = prog.add_parameter("inv_delta", nonneg=True)
        delta = prog.add_parameter("delta", nonneg=True)
        omd = prog.add_parameter("one_minus_delta", nonneg=True)
        ratio = prog.add_parameter("ratio", nonneg=True)
        rth_over_delta = prog.add_parameter("rth_over_delta", 2, nonneg=True)
        w_p1 = prog.add_parameter("w_p1", nt, complex=True)
        w_p2 = prog.add_parameter("w_p2", nt, complex=True)
        w_c1 = prog.add_parameter("w_c1", nt, complex=True)
        w_c2 = prog.add_parameter("w_c2", nt, complex=True)
        s_p = prog.add_parameter("s_p", 2, nonneg=True)
        s_c = prog.add_parameter("s_c", 2, nonneg=True)
        g2 = prog.add_parameter("g2", nonneg=True)
        pbs = prog.add_parameter("pbs", nonneg=True)
        pd2d = prog.add_parameter("pd2d", nonneg=True)
        s_weight = prog.add_parameter("slack_weight", nonneg=True)
        s_max = prog.add_parameter("slack_max", nonneg=True)

        # linearized private / common SINR bounds at the incumbent
        prog.add_constraint(cp.real(cp.conj(w_p1) @ p_1) - s_p[0] * b_p[0] >= g_p[0])
        prog.add_constraint(cp.real(cp.conj(w_p2) @ p_2) - s_p[1] * b_p[1] >= g_p[1])
        prog.add_constraint(cp.real(cp.conj(w_c1) @ p_c) - s_c[0] * b_c[0] >= g_c[0])
        prog.add_constraint(cp.real(cp.conj(w_c2) @ p_c) - s_c[1] * b_c[1] >= g_c[1])
        # interference-plus-noise definitions (noise-normalized channels)
        prog.add_constraint(b_p[0] >= cp.square(cp.abs(cp.conj(h1) @ p_2)) + 1.0, "soc")
        prog.add_constraint(b_p[1] >= cp.square(cp.abs(cp.conj(h2) @ p_1)) + 1.0, "soc")
        prog.add_constraint(
            b_c[0] >= cp.square(cp.abs(cp.conj(h1) @ p_1))
            + cp.square(cp.abs(cp.conj(h1) @ p_2)) + 1.0, "soc")
        prog.add_constraint(
            b_c[1] >= cp.square(cp.abs(cp.conj(h2) @ p_1))
            + cp.square(cp.abs(cp.conj(h2) @ p_2)) + 1.0, "soc")
        # per-user QoS, scaled by 1/delta so delta enters affinely
        for k in range(2):
            prog.add_constraint(
                c[k] * inv_delta + cp.log1p(g_p[k]) / LN2
                >= rth_over_delta[k] - slack, "exp")
        # common-rate split: user-1 slot-1 decode, user-2 slot-1 + cooperative slot
        prog.add_constraint((c[0] + c[1]) * inv_delta
                            <= cp.log1p(g_c[0]) / LN2 + slack, "exp")
        prog.add_constraint((c[0] + c[1]) * inv_delta
                            <= cp.log1p(g_c[1]) / LN2 + ratio * cp.log1p(z) / LN2 + slack,
                            "exp")
        prog.add_constraint(z <= g2 * p_d)
        # budgets
        prog.add_constraint(t_bs >= cp.sum_squares(p_c) + cp.sum_squares(p_1)
                            + cp.sum_squares(p_2), "soc")
        prog.add_constraint(t_bs <= pbs)
        prog.add_constraint(p_d <= pd2d)
        prog.add_constraint(slack <= s_max)

        prog.minimize(delta * t_bs + omd * p_d + s_weight * slack)
        assert prog.problem().is_dcp(dpp=True)
        self.prog = prog
        # decision-variable / constraint catalog of the underlying power
        # program (helper epigraph and slack variables excluded)
        self.catalog_variable_count = 5 * 2 + nt * 2 + nt + 2
        self.catalog_constraint_count = 7 * 2 + 2

    def set_instance(self, h1n, h2n, delta, g2, cfg: SystemConfig, relay_enabled: bool):
        p = self.prog.parameters
        p["h1"].value = h1n
        p["h2"].value = h2n
        p["delta"].value = delta
        p["inv_delta"].value = 1.0 / delta
        p["one_minus_delta"].value = 1.0 - delta
        p["ratio"].value = (1.0 - delta) / delta
        p["rth_over_delta"].value = np.asarray(cfg.rate_thresholds, dtype=float) / delta
        p["g2"].value = g2
        p["pbs"].value = cfg.p_bs
        # no slot 2 at delta == 1, so pin the relay budget to keep the
        # program identical to the relay-disabled one
        p["pd2d"].value = cfg.p_d2d if (relay_enabled and delta < 1.0) else 0.0
        p["slack_weight"].value = 0.0
        p["slack_max"].value = 0.0

    def set_linearization(self, h1n, h2n, it: ScaIterate):
        p = self.prog.parameters
        for key, h, pv, beta in (("w_p1", h1n, it.p_1, it.beta_p[0]),
                                 ("w_p2", h2n, it.p_2, it.beta_p[1]),
                                 ("w_c1", h1n, it.p_c, it.beta_c[0]),
                                 ("w_c2", h2n, it.p_c, it.beta_c[1])):
            v_n = complex(np.vdot(h, pv))  # h^H p at the incumbent
            bound = lower_bound_approx(None, None, beta, v_n)
            skey = {"w_p1": ("s_p", 0), "w_p2": ("s_p", 1),
                    "w_c1": ("s_c", 0), "w_c2": ("s_c", 1)}[key]
            # Re{conj(grad_v) h^H p} = Re{conj(grad_v * h) . p}
            p[key].value = bound.grad_v * h
            vec = p[skey[0]].value if p[skey[0]].value is not None else np.zeros(2)
            vec = np.array(vec)
            vec[skey[1]] = -bound.grad_u
            p[skey[0]].value = vec

    def set_restoration(self, enabled: bool):
        """Turn the program into a pure feasibility-restoration solve.

        The energy terms are zeroed so the objective is just the QoS slack;
        `set_instance` puts the energy weights back on the next build.
        """
        p = self.prog.parameters
        p["slack_weight"].value = 1.0 if enabled else 0.0
        p["slack_max"].value = _RESTORE_SLACK_MAX if enabled else 0.0
        if enabled:
            p["delta"].value = 0.0
            p["one_minus_delta"].value = 0.0


_TEMPLATES: dict[int, _PowerTemplate] = {}


def _template(nt: int) -> _PowerTemplate:
    if nt not in _TEMPLATES:
        _TEMPLATES[nt] = _PowerTemplate(nt)
    return _TEMPLATES[nt]


def _normalized_inputs(ch: ChannelSet, theta1: PhaseVector, theta2: PhaseVector,
                       cfg: SystemConfig):
    h1, h2 = ratemodel.effective_channels(ch, theta1)
    sigma = math.sqrt(cfg.noise_power)
    g = ratemodel.effective_d2d_channel(ch, theta2)
    g2 = abs(g) ** 2 / cfg.noise_power
    return h1 / sigma, h2 / sigma, g2


def _exact_betas(h1n, h2n, p_c, p_1, p_2):
    def pw(h, p):
        return abs(np.vdot(h, p)) ** 2
    beta_p = np.array([pw(h1n, p_2) + 1.0, pw(h2n, p_1) + 1.0])
    beta_c = np.array([pw(h1n, p_1) + pw(h1n, p_2) + 1.0,
                       pw(h2n, p_1) + pw(h2n, p_2) + 1.0])
    return beta_p, beta_c


def _eta(delta: float, p_c, p_1, p_2, p_d: float) -> float:
    bs = float(np.linalg.norm(p_c) ** 2 + np.linalg.norm(p_1) ** 2
               + np.linalg.norm(p_2) ** 2)
    return delta * bs + (1.0 - delta) * p_d


def build_socp(ch: ChannelSet, theta1: PhaseVector, theta2: PhaseVector,
               delta: float, iterate: ScaIterate, cfg: SystemConfig,
               relay_enabled: bool = True) -> ConicProgram:
    """Parametric convex program for one SCA step, linearized at `iterate`."""
    if np.any(iterate.beta_p <= 0) or np.any(iterate.beta_c <= 0):
        raise ValueError("iterate beta values must be strictly positive")
    if ch.n_antennas != iterate.p_c.shape[0]:
        raise ValueError("iterate precoder length inconsistent with channels")
    tmpl = _template(ch.n_antennas)
    h1n, h2n, g2 = _normalized_inputs(ch, theta1, theta2, cfg)
    tmpl.set_instance(h1n, h2n, delta, g2, cfg, relay_enabled)
    tmpl.set_linearization(h1n, h2n, iterate)
    prog = tmpl.prog
    prog.catalog_variable_count = tmpl.catalog_variable_count
    prog.catalog_constraint_count = tmpl.catalog_constraint_count
    return prog


def _heuristic_precoders(h1, h2, cfg: SystemConfig):
    nt = h1.shape[0]
    share = math.sqrt(cfg.p_bs / 3.0) * (1.0 - 1e-6)

    def mrt(h):
        n = np.linalg.norm(h)
        return share * h / n if n > 0 else np.zeros(nt, dtype=complex)

    p_1, p_2 = mrt(h1), mrt(h2)
    mix = (h1 / np.linalg.norm(h1) if np.linalg.norm(h1) > 0 else 0) \
        + (h2 / np.linalg.norm(h2) if np.linalg.norm(h2) > 0 else 0)
    p_c = mrt(mix) if np.linalg.norm(mix) > 0 else np.zeros(nt, dtype=complex)
    return p_c, p_1, p_2


def _iterate_from_values(prog: ConicProgram, delta: float,
                         h1n, h2n, relay_enabled: bool) -> ScaIterate:
    v = {name: var.value for name, var in prog.variables.items()}
    p_c, p_1, p_2 = np.asarray(v["p_c"]), np.asarray(v["p_1"]), np.asarray(v["p_2"])
    p_d = float(v["p_d"]) if relay_enabled and delta < 1.0 else 0.0
    p_d = min(max(p_d, 0.0), np.inf)
    c = np.maximum(np.asarray(v["c"], dtype=float), 0.0)
    beta_p, beta_c = _exact_betas(h1n, h2n, p_c, p_1, p_2)
    return ScaIterate(p_c=p_c, p_1=p_1, p_2=p_2, p_d=p_d, c_split=c,
                      beta_p=beta_p, beta_c=beta_c,
                      gamma_p=np.asarray(v["gamma_p"], dtype=float),
                      gamma_c=np.asarray(v["gamma_c"], dtype=float),
                      eta=_eta(delta, p_c, p_1, p_2, p_d))


def iterate_from_solution(ch: ChannelSet, theta1: PhaseVector, theta2: PhaseVector,
                          sol: PowerSolution, cfg: SystemConfig) -> ScaIterate:
    """Re-anchor an existing solution as an SCA iterate under (new) phases.

    Interference levels are recomputed exactly for the given theta1, so the
    linearization stays an inner approximation after a phase update.
    """
    h1n, h2n, _ = _normalized_inputs(ch, theta1, theta2, cfg)
    beta_p, beta_c = _exact_betas(h1n, h2n, sol.p_c, sol.p_1, sol.p_2)
    gamma_p = np.array([abs(np.vdot(h1n, sol.p_1)) ** 2 / beta_p[0],
                        abs(np.vdot(h2n, sol.p_2)) ** 2 / beta_p[1]])
    gamma_c = np.array([abs(np.vdot(h1n, sol.p_c)) ** 2 / beta_c[0],
                        abs(np.vdot(h2n, sol.p_c)) ** 2 / beta_c[1]])
    return ScaIterate(p_c=sol.p_c.copy(), p_1=sol.p_1.copy(), p_2=sol.p_2.copy(),
                      p_d=sol.p_d, c_split=sol.c_split.copy(),
                      beta_p=beta_p, beta_c=beta_c,
                      gamma_p=gamma_p, gamma_c=gamma_c,
                      eta=_eta(sol.delta, sol.p_c, sol.p_1, sol.p_2, sol.p_d))


def initial_feasible_point(ch: ChannelSet, theta1: PhaseVector, theta2: PhaseVector,
                           delta: float, cfg: SystemConfig,
                           relay_enabled: bool = True) -> ScaIterate | None:
    """Heuristic start (matched filters at full budget) with feasibility restoration.

    Returns None when even the restoration solve cannot reach the QoS region.
    """
    h1, h2 = ratemodel.effective_channels(ch, theta1)
    h1n, h2n, g2 = _normalized_inputs(ch, theta1, theta2, cfg)
    p_c, p_1, p_2 = _heuristic_precoders(h1, h2, cfg)
    p_d = cfg.p_d2d if (relay_enabled and delta < 1.0) else 0.0
    beta_p, beta_c = _exact_betas(h1n, h2n, p_c, p_1, p_2)

    sol = PowerSolution(p_c=p_c, p_1=p_1, p_2=p_2, c_split=np.zeros(2),
                        p_d=p_d, delta=delta)
    report = ratemodel.rate_report(ch, theta1, theta2, sol, cfg)
    c_req = np.maximum(0.0, np.asarray(cfg.rate_thresholds)
                       - np.array([report.r_p1, report.r_p2]))
    gamma_p = np.array([abs(np.vdot(h1n, p_1)) ** 2 / beta_p[0],
                        abs(np.vdot(h2n, p_2)) ** 2 / beta_p[1]])
    gamma_c = np.array([abs(np.vdot(h1n, p_c)) ** 2 / beta_c[0],
                        abs(np.vdot(h2n, p_c)) ** 2 / beta_c[1]])
    if float(np.sum(c_req)) <= report.r_c + 1e-12:
        return ScaIterate(p_c=p_c, p_1=p_1, p_2=p_2, p_d=p_d, c_split=c_req,
                          beta_p=beta_p, beta_c=beta_c, gamma_p=gamma_p,
                          gamma_c=gamma_c, eta=_eta(delta, p_c, p_1, p_2, p_d))

    # feasibility restoration: minimize the worst QoS shortfall by SCA
    it = ScaIterate(p_c=p_c, p_1=p_1, p_2=p_2, p_d=p_d, c_split=c_req,
                    beta_p=beta_p, beta_c=beta_c, gamma_p=gamma_p,
                    gamma_c=gamma_c, eta=_eta(delta, p_c, p_1, p_2, p_d))
    tmpl = _template(ch.n_antennas)
    prev_slack = np.inf
    for n in range(1, _RESTORE_MAX_ITER + 1):
        prog = build_socp(ch, theta1, theta2, delta, it, cfg, relay_enabled)
        tmpl.set_restoration(True)
        out = conic.solve(prog, accuracy=1e-8)
        tmpl.set_restoration(False)
        if out.status is not SolveStatus.OPTIMAL:
            if out.status is SolveStatus.NUMERICAL_FAILURE:
                raise NumericalFailure("restoration", n)
            return None
        slack = float(prog.variables["slack"].value)
        it = _iterate_from_values(prog, delta, h1n, h2n, relay_enabled)
        if slack <= _RESTORE_FEAS_TOL:
            return it
        if prev_slack - slack <= 1e-8:
            return None
        prev_slack = slack
    return None


def sca_solve(ch: ChannelSet, theta1: PhaseVector, theta2: PhaseVector,
              delta: float, cfg: SystemConfig,
              relay_enabled: bool = True,
              initial: ScaIterate | None = None) -> ScaResult:
    """Iterate the convexified power program until the energy stalls.

    Every accepted iterate is feasible for the original constraints (the
    linearization is an inner approximation), so the returned solution passes
    the rate-model audit up to solver accuracy.
    """
    if not 0.0 < delta <= 1.0:
        raise ValueError("delta must lie in (0, 1]")
    h1n, h2n, g2 = _normalized_inputs(ch, theta1, theta2, cfg)
    it = initial if initial is not None else initial_feasible_point(
        ch, theta1, theta2, delta, cfg, relay_enabled)
    if it is None:
        return ScaResult(feasible=False, solution=None)

    trace: list[ScaTraceRecord] = []
    eta_prev = it.eta
    converged = False
    n = 0
    for n in range(1, cfg.max_iter_sca + 1):
        prog = build_socp(ch, theta1, theta2, delta, it, cfg, relay_enabled)
        out = conic.solve(prog, accuracy=1e-8)
        if out.status is SolveStatus.NUMERICAL_FAILURE:
            raise NumericalFailure("sca", n)
        if out.status is not SolveStatus.OPTIMAL:
            # the incumbent is feasible for the subproblem, so this is a
            # solver artifact; keep the incumbent and stop
            break
        it = _iterate_from_values(prog, delta, h1n, h2n, relay_enabled)
        sol = _to_solution(it, delta)
        report = ratemodel.check_feasibility(sol, ch, theta1, theta2, cfg)
        trace.append(ScaTraceRecord(iteration=n, eta=it.eta,
                                    solver_status=out.status.value,
                                    max_violation=-min(0.0, report.worst()[1])))
        if abs(eta_prev - it.eta) <= cfg.tol_sca:
            converged = True
            break
        eta_prev = it.eta

    return ScaResult(feasible=True, solution=_to_solution(it, delta),
                     trace=trace, iterations=n, converged=converged)


def _to_solution(it: ScaIterate, delta: float) -> PowerSolution:
    return PowerSolution(p_c=it.p_c.copy(), p_1=it.p_1.copy(), p_2=it.p_2.copy(),
                         c_split=it.c_split.copy(), p_d=it.p_d, delta=delta)

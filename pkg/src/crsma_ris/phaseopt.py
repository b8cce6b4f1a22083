"""Sub-problem 2: RIS phase design.

Slot-2 phases have a closed form (co-phasing of the relayed path with the
direct device-to-device link).  Slot-1 phases go through matrix lifting: the
unit-modulus vector becomes a rank-one PSD matrix with unit diagonal, the SINR
constraints become linear trace constraints, and rank one is recovered by a
difference-of-convex loop on the nuclear-minus-spectral-norm penalty.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import cvxpy as cp
import numpy as np

from . import conic, ratemodel
from .channels import ChannelSet
from .conic import ConicProgram, SolveStatus
from .config import SystemConfig
from .ratemodel import PhaseVector, PowerSolution

EXTRACTION_PIVOT_TOL = 1e-9


class PhaseStepInfeasible(RuntimeError):
    """The lifted constraint set admits no unit-diagonal PSD matrix."""


class ExtractionFailure(RuntimeError):
    """Rank-one factor has a vanishing reference entry; phases undefined."""


def closed_form_theta2(h_12: complex, h_1r: np.ndarray, hhat_r2: np.ndarray) -> PhaseVector:
    """Slot-2 phases aligning every reflected path with the direct link.

    theta_m = arg(h_12) - arg(h_1r[m] * conj(hhat_r2[m])); with these phases
    the combined channel magnitude is |h_12| + sum_m |h_1r[m]| |hhat_r2[m]|.
    """
    h_1r = np.asarray(h_1r)
    hhat_r2 = np.asarray(hhat_r2)
    if h_1r.shape != hhat_r2.shape:
        raise ValueError("RIS-side vectors must share a shape")
    theta = np.angle(h_12) - np.angle(h_1r * np.conj(hhat_r2))
    return PhaseVector(theta)


@dataclass
class LiftedMatrix:
    """Outcome of the DC loop: lifted matrix plus its rank-one certificate."""

    V: np.ndarray
    dc_residual: float
    iterations: int = 0
    alpha: float | None = None
    trace: list = field(default_factory=list)
    extraction_error: float | None = None


@dataclass
class TraceConstraint:
    """Re tr(A V) >= rhs, normalized so the data sits at unit scale."""

    A: np.ndarray
    rhs: float
    label: str

    def margin(self, V: np.ndarray) -> float:
        return float(np.real(np.trace(self.A @ V))) - self.rhs


@dataclass
class LiftedProblem:
    """Lifted slot-1 phase feasibility data for one power solution."""

    Q: dict            # (user, stream) -> (M+1, M+1) Hermitian
    b: dict            # (user, stream) -> complex direct-path constant
    mu: np.ndarray     # (2,) private-stream SINR thresholds
    mu_c1: float
    mu_c2: float
    r_c2_slot2: float
    noise_power: float
    m: int

    def trace_constraints(self) -> list[TraceConstraint]:
        """Compile the SINR constraints into normalized trace form.

        Private streams use mu_k at each user; the common stream uses mu_c1
        at user 1 (slot-1 decode) and mu_c2 at user 2 (slot-2 credit), which
        mirrors the split-rate constraints the power step enforced, so the
        incumbent phases always remain feasible here.
        """
        out = []
        specs = [("private_1", 1, "p1", ["p2"], self.mu[0]),
                 ("private_2", 2, "p2", ["p1"], self.mu[1]),
                 ("common_1", 1, "c", ["p1", "p2"], self.mu_c1),
                 ("common_2", 2, "c", ["p1", "p2"], self.mu_c2)]
        for label, k, sig, interferers, mu in specs:
            A = np.array(self.Q[(k, sig)], dtype=complex)
            rhs = mu * self.noise_power - abs(self.b[(k, sig)]) ** 2
            for j in interferers:
                A -= mu * self.Q[(k, j)]
                rhs += mu * abs(self.b[(k, j)]) ** 2
            scale = max(np.linalg.norm(A), abs(rhs), 1e-300)
            out.append(TraceConstraint(A=A / scale, rhs=rhs / scale, label=label))
        return out


def _lift_coefficients(h_direct: np.ndarray, h_ris: np.ndarray, H_br: np.ndarray,
                       p: np.ndarray) -> tuple[np.ndarray, complex]:
    """(a, b) with |h_k^H p|^2 = |v^H a + b|^2 for v = conj(phases)."""
    a = np.conj(h_ris) * (H_br.conj().T @ p)
    b = complex(np.vdot(h_direct, p))
    return a, b


def _lift_matrix(a: np.ndarray, b: complex) -> np.ndarray:
    m = a.shape[0]
    Q = np.zeros((m + 1, m + 1), dtype=complex)
    Q[:m, :m] = np.outer(a, a.conj())
    Q[:m, m] = a * np.conj(b)
    Q[m, :m] = b * a.conj()
    return Q


def lifted_quadratic(Q: np.ndarray, b: complex, v_bar: np.ndarray) -> float:
    """|b|^2 + v_bar^H Q v_bar, the lifted form of |h^H p|^2."""
    return float(abs(b) ** 2 + np.real(np.vdot(v_bar, Q @ v_bar)))


def rank_one_lift(theta: PhaseVector) -> np.ndarray:
    """V = v_bar v_bar^H for v = conj(e^{j theta}), v_bar = [v; 1]."""
    v_bar = np.concatenate([np.conj(theta.phases), [1.0 + 0.0j]])
    return np.outer(v_bar, v_bar.conj())


def build_lifted_problem(ch: ChannelSet, sol: PowerSolution,
                         cfg: SystemConfig) -> LiftedProblem:
    """Lift the slot-1 SINR constraints at the incumbent power solution."""
    delta = sol.delta
    if delta <= 0:
        raise ValueError("slot-1 duration must be positive")
    theta2 = closed_form_theta2(ch.h_12, ch.h_1r, ch.hhat_r2)
    r_slot2 = ratemodel.rate_common_slot2(ch, theta2, sol.p_d, delta, cfg.noise_power)
    streams = {"c": sol.p_c, "p1": sol.p_1, "p2": sol.p_2}
    ris = {1: ch.h_r1, 2: ch.h_r2}
    direct = {1: ch.h_b1, 2: ch.h_b2}
    Q, b = {}, {}
    for k in (1, 2):
        for sig, p in streams.items():
            a_kj, b_kj = _lift_coefficients(direct[k], ris[k], ch.H_br, p)
            Q[(k, sig)] = _lift_matrix(a_kj, b_kj)
            b[(k, sig)] = b_kj
    c1, c2 = float(sol.c_split[0]), float(sol.c_split[1])
    mu = np.array([2.0 ** ((cfg.rate_thresholds[0] - c1) / delta) - 1.0,
                   2.0 ** ((cfg.rate_thresholds[1] - c2) / delta) - 1.0])
    mu_c1 = 2.0 ** ((c1 + c2) / delta) - 1.0
    mu_c2 = 2.0 ** ((c1 + c2 - r_slot2) / delta) - 1.0
    return LiftedProblem(Q=Q, b=b, mu=mu, mu_c1=mu_c1, mu_c2=mu_c2,
                         r_c2_slot2=r_slot2, noise_power=cfg.noise_power,
                         m=ch.n_ris_elements)


def spectral_subgradient(V: np.ndarray) -> np.ndarray:
    """v1 v1^H for a unit top eigenvector of the Hermitian PSD matrix V."""
    _, vecs = np.linalg.eigh(V)
    v1 = vecs[:, -1]
    return np.outer(v1, v1.conj())


def dc_residual(V: np.ndarray) -> float:
    """Nuclear minus spectral norm of a PSD matrix: trace minus top eigenvalue."""
    ev = np.linalg.eigvalsh(V)
    return float(np.real(np.trace(V))) - float(ev[-1])


class _SdpTemplate:
    """Parametric SDP pair (margin stage / DC stage) for one (dim, n) shape."""

    def __init__(self, dim: int, n_cons: int):
        self.margin = self._build(dim, n_cons, margin_stage=True)
        self.dc = self._build(dim, n_cons, margin_stage=False)

    @staticmethod
    def _build(dim: int, n_cons: int, margin_stage: bool) -> ConicProgram:
        prog = ConicProgram()
        V = prog.add_variable("V", (dim, dim), hermitian=True)
        prog.add_constraint(V >> 0, "psd")
        prog.add_constraint(cp.diag(V) == 1.0, "linear")
        rhs = prog.add_parameter("rhs", n_cons) if n_cons else None
        if margin_stage:
            alpha = prog.add_variable("alpha")
        for i in range(n_cons):
            A = prog.add_parameter(f"A{i}", (dim, dim), hermitian=True)
            if margin_stage:
                prog.add_constraint(cp.real(cp.trace(A @ V)) >= rhs[i] + alpha,
                                    "linear")
            else:
                prog.add_constraint(cp.real(cp.trace(A @ V)) >= rhs[i], "linear")
        if margin_stage:
            if n_cons == 0:
                prog.add_constraint(alpha == 0.0, "linear")
            prog.maximize(alpha)
        else:
            sub = prog.add_parameter("sub", (dim, dim), hermitian=True)
            prog.minimize(cp.real(cp.trace(V)) - cp.real(cp.trace(sub @ V)))
        assert prog.problem().is_dcp(dpp=True)
        return prog


_SDP_TEMPLATES: dict[tuple[int, int], _SdpTemplate] = {}


def _sdp_template(dim: int, n_cons: int) -> _SdpTemplate:
    key = (dim, n_cons)
    if key not in _SDP_TEMPLATES:
        _SDP_TEMPLATES[key] = _SdpTemplate(dim, n_cons)
    return _SDP_TEMPLATES[key]


_MARGIN_KEEP = 0.5          # fraction of the achievable margin enforced in the DC stage
_FEASIBLE_MARGIN_TOL = 1e-7
_SDP_ACCURACY = 1e-8


def _set_constraint_params(prog: ConicProgram, cons: list[TraceConstraint],
                           rhs: np.ndarray) -> None:
    if cons:
        prog.parameters["rhs"].value = rhs
        for i, tc in enumerate(cons):
            prog.parameters[f"A{i}"].value = tc.A


def dc_solve(cons: list[TraceConstraint], V0: np.ndarray, cfg: SystemConfig,
             margin_boost: bool = True) -> LiftedMatrix:
    """DC rank-one loop over an arbitrary trace-constraint set.

    A first solve maximizes the common constraint margin alpha; alpha < 0
    certifies infeasibility of the phase step.  The DC iterations then keep a
    fraction of that margin as an improvement floor while driving the
    nuclear-minus-spectral residual below zeta_dc.
    """
    V0 = np.asarray(V0, dtype=complex)
    dim = V0.shape[0]
    if not np.allclose(np.diag(V0).real, 1.0, atol=1e-6):
        raise ValueError("V0 must have a unit diagonal")
    rhs = np.array([tc.rhs for tc in cons], dtype=float)
    tmpl = _sdp_template(dim, len(cons))

    alpha = None
    rhs_work = rhs
    if cons:
        _set_constraint_params(tmpl.margin, cons, rhs)
        out = conic.solve(tmpl.margin, accuracy=_SDP_ACCURACY)
        if out.status is SolveStatus.NUMERICAL_FAILURE:
            raise conic.NumericalFailure("phase-margin", 0)
        if out.status is not SolveStatus.OPTIMAL:
            raise PhaseStepInfeasible("margin-stage SDP infeasible")
        alpha = float(out.objective)
        if alpha < -_FEASIBLE_MARGIN_TOL:
            raise PhaseStepInfeasible(f"best margin {alpha:.3e} < 0")
        if margin_boost:
            rhs_work = rhs + _MARGIN_KEEP * max(alpha, 0.0)

    res0 = dc_residual(V0)
    margins0 = np.array([tc.margin(V0) - extra
                         for tc, extra in zip(cons, rhs_work - rhs)]) if cons else np.array([])
    if res0 <= min(cfg.zeta_dc, 1e-9) and (margins0.size == 0
                                           or margins0.min() >= -_FEASIBLE_MARGIN_TOL):
        return LiftedMatrix(V=V0, dc_residual=res0, iterations=0, alpha=alpha)

    V = V0
    residual = res0
    trace = []
    r = 0
    for r in range(1, cfg.max_iter_dc + 1):
        sub = spectral_subgradient(V)
        _set_constraint_params(tmpl.dc, cons, rhs_work)
        tmpl.dc.parameters["sub"].value = sub
        out = conic.solve(tmpl.dc, accuracy=_SDP_ACCURACY)
        if out.status is SolveStatus.NUMERICAL_FAILURE:
            raise conic.NumericalFailure("phase-dc", r)
        if out.status is not SolveStatus.OPTIMAL:
            raise PhaseStepInfeasible(f"DC-stage SDP {out.status.value} at iteration {r}")
        V = np.asarray(out.primal["V"])
        V = (V + V.conj().T) / 2.0
        residual = dc_residual(V)
        trace.append((r, float(out.objective), residual, out.status.value))
        if residual <= cfg.zeta_dc:
            break
    return LiftedMatrix(V=V, dc_residual=residual, iterations=r, alpha=alpha,
                        trace=trace)


def dc_rank_one_solve(lp: LiftedProblem, V0: np.ndarray, cfg: SystemConfig,
                      margin_boost: bool = True) -> LiftedMatrix:
    """Rank-one lifted solve of the slot-1 phase sub-problem."""
    return dc_solve(lp.trace_constraints(), V0, cfg, margin_boost=margin_boost)


def _rank_one_factor(V: np.ndarray, residual: float) -> np.ndarray:
    if residual <= EXTRACTION_PIVOT_TOL:
        try:
            L = np.linalg.cholesky(V + EXTRACTION_PIVOT_TOL
                                   * np.trace(V).real * np.eye(V.shape[0]))
            return L[:, int(np.argmax(np.linalg.norm(L, axis=0)))]
        except np.linalg.LinAlgError:
            pass
    ev, vecs = np.linalg.eigh(V)
    return math.sqrt(max(ev[-1], 0.0)) * vecs[:, -1]


def extract_phases(lifted: LiftedMatrix) -> PhaseVector:
    """Recover slot-1 phases from a (near) rank-one lifted matrix.

    Divides the leading entries of the rank-one factor by the reference entry
    and projects onto unit modulus; the projection error is recorded on the
    input for the trace.
    """
    v_bar = _rank_one_factor(lifted.V, lifted.dc_residual)
    t = v_bar[-1]
    if abs(t) < EXTRACTION_PIVOT_TOL:
        raise ExtractionFailure("reference entry of the rank-one factor vanished")
    v = v_bar[:-1] / t
    phi = np.conj(v)
    mags = np.abs(phi)
    lifted.extraction_error = float(np.max(np.abs(mags - 1.0), initial=0.0))
    safe = np.where(mags > 0, mags, 1.0)
    return PhaseVector(np.angle(phi / safe))

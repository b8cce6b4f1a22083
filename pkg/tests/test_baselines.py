import math

import numpy as np
import pytest

from crsma_ris import aodriver, ratemodel
from crsma_ris.baselines import (NomaSolution, SchemeId, audit_solution,
                                 noma_check_feasibility, noma_delta_search,
                                 noma_lifted_constraints, noma_rate_report,
                                 noma_sca_solve, solve_cnoma_ris,
                                 solve_crsma_noris, solve_noma_ris,
                                 solve_rsma_ris, solve_scheme, strip_ris)
from crsma_ris.channels import ChannelSet, generate_channels
from crsma_ris.config import SystemConfig
from crsma_ris.phaseopt import closed_form_theta2, rank_one_lift
from crsma_ris.ratemodel import PhaseVector

GRID = (0.3, 0.6, 1.0)


def _instance(m=8, seed=31, **kw):
    kw.setdefault("delta_grid", GRID)
    cfg = SystemConfig(n_ris_elements=m, rng_seed=seed, **kw)
    ch = generate_channels(cfg, np.random.default_rng(seed))
    return cfg, ch


def _zeroed_ris(ch, m):
    nt = ch.n_antennas
    return ChannelSet(h_b1=ch.h_b1, h_b2=ch.h_b2,
                      H_br=np.zeros((nt, m), dtype=complex),
                      h_r1=np.zeros(m, dtype=complex),
                      h_r2=np.zeros(m, dtype=complex),
                      hhat_r2=np.zeros(m, dtype=complex),
                      h_1r=np.zeros(m, dtype=complex), h_12=ch.h_12)


class TestStripRis:
    def test_strips_to_zero_elements(self):
        cfg, ch = _instance()
        bare = strip_ris(ch)
        assert bare.n_ris_elements == 0
        np.testing.assert_array_equal(bare.h_b1, ch.h_b1)
        assert bare.h_12 == ch.h_12


class TestNomaPowerStep:
    def test_sca_descent_and_audit(self):
        cfg, ch = _instance()
        rng = np.random.default_rng(0)
        t1 = PhaseVector.random(8, rng)
        t2 = closed_form_theta2(ch.h_12, ch.h_1r, ch.hhat_r2)
        res = noma_sca_solve(ch, t1, t2, 0.5, cfg)
        assert res.feasible
        etas = [r.eta for r in res.trace]
        for a, b in zip(etas, etas[1:]):
            assert b <= a + 1e-6
        report = noma_check_feasibility(res.solution, ch, t1, t2, cfg)
        assert report.ok()
        assert report.margins["sic_decode"] >= -1e-6

    def test_rate_report_consistency(self):
        cfg, ch = _instance(seed=32)
        rng = np.random.default_rng(1)
        t1 = PhaseVector.random(8, rng)
        t2 = closed_form_theta2(ch.h_12, ch.h_1r, ch.hhat_r2)
        sol = NomaSolution(w_1=rng.standard_normal(4) * 1e-2 + 0j,
                           w_2=rng.standard_normal(4) * 1e-2 + 0j,
                           p_d=0.2, delta=0.5)
        rep = noma_rate_report(ch, t1, t2, sol, cfg)
        assert rep.r_far_total == pytest.approx(rep.r_far_slot1 + rep.r_far_slot2)
        assert rep.energy == pytest.approx(0.5 * sol.bs_power + 0.5 * 0.2)

    def test_lifted_constraints_hold_at_incumbent(self):
        cfg, ch = _instance(seed=33)
        rng = np.random.default_rng(2)
        t1 = PhaseVector.random(8, rng)
        t2 = closed_form_theta2(ch.h_12, ch.h_1r, ch.hhat_r2)
        res = noma_sca_solve(ch, t1, t2, 0.5, cfg)
        assert res.feasible
        cons = noma_lifted_constraints(ch, res.solution, cfg)
        margins = [tc.margin(rank_one_lift(t1)) for tc in cons]
        assert min(margins) >= -1e-7


class TestSchemes:
    def test_rsma_ris_relay_identically_zero(self):
        cfg, ch = _instance(seed=34)
        res = solve_rsma_ris(ch, cfg)
        assert res.feasible
        assert res.best_delta == 1.0
        assert res.solution.p_d == 0.0
        assert audit_solution(SchemeId.RSMA_RIS, res, ch, cfg).ok(rate_tol=1e-5)

    def test_rsma_equals_relay_disabled_unit_grid_proposal(self):
        cfg, ch = _instance(seed=35)
        a = solve_rsma_ris(ch, cfg)
        b = aodriver.delta_search(ch, cfg, relay_enabled=False, delta_grid=(1.0,))
        assert a.energy_watts == pytest.approx(b.energy_watts, rel=1e-9)

    def test_noma_with_zeroed_ris_matches_stripped_channels(self):
        cfg, ch = _instance(seed=36)
        cfg0 = SystemConfig(n_ris_elements=0, rng_seed=36, delta_grid=GRID)
        a = solve_noma_ris(_zeroed_ris(ch, 8), cfg)
        b = solve_noma_ris(strip_ris(ch), cfg0)
        assert a.feasible and b.feasible
        assert a.energy_watts == pytest.approx(b.energy_watts, rel=1e-4)

    def test_cnoma_unit_grid_reduces_to_noma(self):
        cfg, ch = _instance(seed=37)
        a = noma_delta_search(ch, cfg, relay_enabled=True, delta_grid=(1.0,))
        b = solve_noma_ris(ch, cfg)
        assert a.energy_watts == pytest.approx(b.energy_watts, rel=1e-9)

    def test_crsma_noris_is_stripped_proposal(self):
        cfg, ch = _instance(seed=38)
        a = solve_crsma_noris(ch, cfg)
        b = aodriver.delta_search(strip_ris(ch), cfg)
        assert a.energy_watts == pytest.approx(b.energy_watts, rel=1e-12)

    def test_all_schemes_feasible_and_audited(self):
        cfg, ch = _instance(seed=39)
        for scheme in SchemeId:
            res = solve_scheme(scheme, ch, cfg)
            assert res.feasible, scheme
            assert audit_solution(scheme, res, ch, cfg).ok(rate_tol=1e-5), scheme

    def test_cnoma_noris_deterministic(self):
        cfg, ch = _instance(seed=40)
        a = solve_scheme(SchemeId.CNOMA_NORIS, ch, cfg)
        b = solve_scheme(SchemeId.CNOMA_NORIS, ch, cfg)
        assert a.energy_watts == b.energy_watts
        assert a.best_delta == b.best_delta

    def test_starved_budget_infeasible_everywhere(self):
        cfg, ch = _instance(seed=41, p_bs_dbm=-300.0)
        res = solve_scheme(SchemeId.NOMA_RIS, ch, cfg)
        assert not res.feasible
        assert res.energy_watts == math.inf

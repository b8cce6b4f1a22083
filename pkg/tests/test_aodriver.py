import math

import numpy as np
import pytest

from crsma_ris import ratemodel
from crsma_ris.aodriver import AOResult, ao_solve, delta_search
from crsma_ris.channels import generate_channels
from crsma_ris.config import SystemConfig
from crsma_ris.ratemodel import PhaseVector
from crsma_ris.scapower import sca_solve


def _instance(m=8, seed=21, **cfg_kw):
    cfg = SystemConfig(n_ris_elements=m, rng_seed=seed, **cfg_kw)
    ch = generate_channels(cfg, np.random.default_rng(seed))
    return cfg, ch


class TestAoSolve:
    def test_descending_trace_and_feasible_bundle(self):
        cfg, ch = _instance()
        theta0 = PhaseVector.random(8, np.random.default_rng(1))
        res = ao_solve(ch, 0.5, cfg, theta0)
        assert res.feasible and res.converged
        etas = [r.eta for r in res.trace]
        for a, b in zip(etas, etas[1:]):
            assert b <= a + 1e-5
        report = ratemodel.check_feasibility(res.solution, ch, res.theta1,
                                             res.theta2, cfg)
        assert report.ok(rate_tol=1e-5)

    def test_phase_updates_help_at_least_once(self):
        cfg, ch = _instance(seed=22)
        theta0 = PhaseVector.random(8, np.random.default_rng(2))
        res = ao_solve(ch, 0.5, cfg, theta0)
        assert res.feasible
        assert any(r.phase_accepted for r in res.trace[:-1]) or len(res.trace) == 1

    def test_m_zero_reduces_to_single_power_solve(self):
        cfg, ch = _instance(m=0, seed=23)
        empty = PhaseVector.zeros(0)
        res = ao_solve(ch, 0.5, cfg, empty)
        assert res.feasible and len(res.trace) == 1
        direct = sca_solve(ch, empty, empty, 0.5, cfg)
        assert res.energy == pytest.approx(ratemodel.total_energy(direct.solution),
                                           rel=1e-12)

    def test_rejects_bad_delta(self):
        cfg, ch = _instance()
        with pytest.raises(ValueError):
            ao_solve(ch, 1.5, cfg, PhaseVector.zeros(8))

    def test_infeasible_instance_reported(self):
        cfg, ch = _instance(p_bs_dbm=-300.0)
        res = ao_solve(ch, 0.5, cfg, PhaseVector.zeros(8))
        assert not res.feasible
        assert res.energy == math.inf


class TestDeltaSearch:
    GRID = (0.3, 0.6, 1.0)

    def test_best_entry_is_table_minimum(self):
        cfg, ch = _instance(seed=24)
        res = delta_search(ch, cfg, delta_grid=self.GRID)
        assert res.feasible
        assert res.energy_watts == min(res.delta_table.values())
        assert res.delta_table[res.best_delta] == res.energy_watts
        report = ratemodel.check_feasibility(res.solution, ch, res.theta1,
                                             res.theta2, cfg)
        assert report.ok(rate_tol=1e-5)

    def test_table_entry_reproducible(self):
        cfg, ch = _instance(seed=25)
        res = delta_search(ch, cfg, delta_grid=self.GRID)
        best = res.per_delta[res.best_delta]
        rerun = ao_solve(ch, res.best_delta, cfg, best.initial_theta1)
        assert rerun.energy == pytest.approx(res.energy_watts, abs=1e-6)

    def test_deterministic_across_runs(self):
        cfg, ch = _instance(seed=26)
        a = delta_search(ch, cfg, delta_grid=self.GRID)
        b = delta_search(ch, cfg, delta_grid=self.GRID)
        assert a.best_delta == b.best_delta
        assert a.energy_watts == b.energy_watts
        np.testing.assert_array_equal(a.theta1.theta, b.theta1.theta)
        assert a.delta_table == b.delta_table

    def test_starved_budget_all_infinite(self):
        cfg, ch = _instance(p_bs_dbm=-300.0)
        res = delta_search(ch, cfg, delta_grid=self.GRID)
        assert not res.feasible
        assert all(v == math.inf for v in res.delta_table.values())
        assert res.solution is None

    def test_relay_disabled_with_unit_delta(self):
        cfg, ch = _instance(seed=27)
        res = delta_search(ch, cfg, relay_enabled=False, delta_grid=(1.0,))
        assert res.feasible
        assert res.best_delta == 1.0
        assert res.solution.p_d == 0.0

import numpy as np
import pytest

from crsma_ris import ratemodel
from crsma_ris.channels import ChannelSet, generate_channels
from crsma_ris.config import SystemConfig
from crsma_ris.ratemodel import PhaseVector, PowerSolution
from crsma_ris.scapower import (build_socp, initial_feasible_point,
                                lower_bound_approx, sca_solve)


def _qol(u, v):
    return float(np.vdot(np.atleast_1d(v), np.atleast_1d(v)).real) / u


class TestLowerBound:
    def test_tight_at_expansion_point(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            u_n = float(rng.uniform(0.1, 10.0))
            v_n = complex(rng.standard_normal() + 1j * rng.standard_normal())
            bound = lower_bound_approx(u_n, v_n, u_n, v_n)
            assert bound.evaluate(u_n, v_n) == pytest.approx(_qol(u_n, v_n), rel=1e-12)

    def test_zero_expansion_gives_zero_form(self):
        bound = lower_bound_approx(1.0, 0.0, 2.0, 0.0)
        assert bound.evaluate(5.0, 3.0 + 4.0j) == 0.0

    def test_randomized_domination(self):
        rng = np.random.default_rng(4)
        for _ in range(1000):
            u_n = float(rng.uniform(0.05, 20.0))
            v_n = complex(rng.standard_normal() + 1j * rng.standard_normal())
            u = float(rng.uniform(0.05, 20.0))
            v = complex(2 * rng.standard_normal() + 2j * rng.standard_normal())
            bound = lower_bound_approx(u, v, u_n, v_n)
            assert bound.evaluate(u, v) <= _qol(u, v) + 1e-9

    def test_vector_arguments(self):
        rng = np.random.default_rng(5)
        v_n = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        v = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        bound = lower_bound_approx(1.0, v, 2.5, v_n)
        assert bound.evaluate(2.5, v_n) == pytest.approx(_qol(2.5, v_n), rel=1e-12)
        assert bound.evaluate(1.3, v) <= _qol(1.3, v) + 1e-9

    def test_rejects_nonpositive_expansion(self):
        with pytest.raises(ValueError):
            lower_bound_approx(1.0, 1.0, 0.0, 1.0)


def _small_cfg(**kw):
    base = dict(n_ris_elements=8, rng_seed=11)
    base.update(kw)
    return SystemConfig(**base)


def _instance(cfg, seed=0):
    rng = np.random.default_rng(seed)
    ch = generate_channels(cfg, rng)
    m = cfg.n_ris_elements
    theta1 = PhaseVector.random(m, rng)
    theta2 = PhaseVector.random(m, rng)
    return ch, theta1, theta2


class TestBuildSocp:
    def test_catalog_counts_match_k2(self):
        cfg = _small_cfg()
        ch, t1, t2 = _instance(cfg)
        it = initial_feasible_point(ch, t1, t2, 0.5, cfg)
        prog = build_socp(ch, t1, t2, 0.5, it, cfg)
        nt, k = cfg.n_antennas, 2
        assert prog.catalog_variable_count == (5 + nt) * k + nt + 2 == 24
        assert prog.catalog_constraint_count == 7 * k + 2 == 16

    def test_rejects_bad_iterate(self):
        cfg = _small_cfg()
        ch, t1, t2 = _instance(cfg)
        it = initial_feasible_point(ch, t1, t2, 0.5, cfg)
        it.beta_p = np.array([0.0, 1.0])
        with pytest.raises(ValueError):
            build_socp(ch, t1, t2, 0.5, it, cfg)

    def test_zero_solution_feasible_when_nothing_demanded(self):
        cfg = _small_cfg(rate_thresholds=(0.0, 0.0))
        ch, t1, t2 = _instance(cfg)
        sol = PowerSolution.zeros(cfg.n_antennas, delta=0.5)
        report = ratemodel.check_feasibility(sol, ch, t1, t2, cfg)
        assert report.ok()
        res = sca_solve(ch, t1, t2, 0.5, cfg)
        assert res.feasible
        assert ratemodel.total_energy(res.solution) <= 1e-5


class TestInitialPoint:
    def test_generous_budget_point_is_feasible(self):
        cfg = _small_cfg(rate_thresholds=(0.5, 0.5))
        ch, t1, t2 = _instance(cfg)
        it = initial_feasible_point(ch, t1, t2, 0.5, cfg)
        assert it is not None
        sol = PowerSolution(p_c=it.p_c, p_1=it.p_1, p_2=it.p_2,
                            c_split=it.c_split, p_d=it.p_d, delta=0.5)
        assert ratemodel.check_feasibility(sol, ch, t1, t2, cfg).ok()

    def test_starved_bs_budget_is_infeasible(self):
        cfg = _small_cfg(p_bs_dbm=-300.0, rate_thresholds=(1.0, 3.0))
        ch, t1, t2 = _instance(cfg)
        assert initial_feasible_point(ch, t1, t2, 0.5, cfg) is None

    def test_beta_values_are_exact(self):
        cfg = _small_cfg()
        ch, t1, t2 = _instance(cfg)
        it = initial_feasible_point(ch, t1, t2, 0.5, cfg)
        h1, h2 = ratemodel.effective_channels(ch, t1)
        sigma2 = cfg.noise_power
        bp1 = abs(np.vdot(h1, it.p_2)) ** 2 / sigma2 + 1.0
        bp2 = abs(np.vdot(h2, it.p_1)) ** 2 / sigma2 + 1.0
        np.testing.assert_allclose(it.beta_p, [bp1, bp2], rtol=1e-10)
        bc1 = (abs(np.vdot(h1, it.p_1)) ** 2 + abs(np.vdot(h1, it.p_2)) ** 2) / sigma2 + 1.0
        np.testing.assert_allclose(it.beta_c[0], bc1, rtol=1e-10)


class TestScaSolve:
    def test_monotone_descent_and_feasible_exit(self):
        cfg = _small_cfg()
        ch, t1, t2 = _instance(cfg, seed=1)
        res = sca_solve(ch, t1, t2, 0.5, cfg)
        assert res.feasible and res.converged
        etas = [r.eta for r in res.trace]
        for a, b in zip(etas, etas[1:]):
            assert b <= a + 1e-6
        assert abs(etas[-1] - etas[-2]) <= cfg.tol_sca if len(etas) > 1 else True
        assert max(r.max_violation for r in res.trace) <= 1e-6
        sol = res.solution
        assert ratemodel.check_feasibility(sol, ch, t1, t2, cfg).ok()
        assert sol.bs_power <= cfg.p_bs + 1e-9
        assert 0.0 <= sol.p_d <= cfg.p_d2d + 1e-9

    def test_every_iterate_original_feasible(self):
        cfg = _small_cfg()
        for seed in range(3):
            ch, t1, t2 = _instance(cfg, seed=seed)
            res = sca_solve(ch, t1, t2, 0.4, cfg)
            assert res.feasible
            for rec in res.trace:
                assert rec.max_violation <= 1e-6

    def test_m_zero_matches_zeroed_ris_arrays(self):
        cfg0 = _small_cfg(n_ris_elements=0)
        rng = np.random.default_rng(9)
        ch0 = generate_channels(cfg0, rng)
        empty = PhaseVector.zeros(0)
        res0 = sca_solve(ch0, empty, empty, 0.5, cfg0)

        m = 8
        zeros_ris = ChannelSet(
            h_b1=ch0.h_b1, h_b2=ch0.h_b2,
            H_br=np.zeros((cfg0.n_antennas, m), dtype=complex),
            h_r1=np.zeros(m, dtype=complex), h_r2=np.zeros(m, dtype=complex),
            hhat_r2=np.zeros(m, dtype=complex), h_1r=np.zeros(m, dtype=complex),
            h_12=ch0.h_12)
        theta = PhaseVector.random(m, np.random.default_rng(10))
        cfgm = _small_cfg(n_ris_elements=m)
        resm = sca_solve(zeros_ris, theta, theta, 0.5, cfgm)
        assert res0.feasible and resm.feasible
        e0 = ratemodel.total_energy(res0.solution)
        em = ratemodel.total_energy(resm.solution)
        assert em == pytest.approx(e0, rel=1e-6)

    def test_relay_disabled_forces_zero_pd(self):
        cfg = _small_cfg()
        ch, t1, t2 = _instance(cfg, seed=2)
        res = sca_solve(ch, t1, t2, 0.5, cfg, relay_enabled=False)
        assert res.feasible
        assert res.solution.p_d == 0.0

    def test_single_user_toy_matches_rate_inversion(self):
        # single transmit antenna, far user silenced: the optimum is the
        # scalar inversion delta * sigma^2 (2^{R/delta} - 1) / |h|^2
        delta, r_th = 0.5, 3.0
        cfg = SystemConfig(n_antennas=1, n_ris_elements=0,
                           rate_thresholds=(r_th, 0.0), tol_sca=1e-8)
        empty = PhaseVector.zeros(0)
        rng = np.random.default_rng(42)
        for _ in range(5):
            h = (rng.standard_normal() + 1j * rng.standard_normal()) * 1e-5
            ch = ChannelSet(h_b1=np.array([h]), h_b2=np.array([0.0j]),
                            H_br=np.zeros((1, 0), dtype=complex),
                            h_r1=np.zeros(0, dtype=complex),
                            h_r2=np.zeros(0, dtype=complex),
                            hhat_r2=np.zeros(0, dtype=complex),
                            h_1r=np.zeros(0, dtype=complex), h_12=0.0j)
            res = sca_solve(ch, empty, empty, delta, cfg)
            assert res.feasible
            expected = delta * cfg.noise_power * (2 ** (r_th / delta) - 1) / abs(h) ** 2
            assert ratemodel.total_energy(res.solution) == pytest.approx(expected, rel=1e-4)

    def test_rejects_bad_delta(self):
        cfg = _small_cfg()
        ch, t1, t2 = _instance(cfg)
        with pytest.raises(ValueError):
            sca_solve(ch, t1, t2, 0.0, cfg)

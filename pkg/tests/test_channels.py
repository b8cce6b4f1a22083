import numpy as np
import pytest

from crsma_ris.channels import (generate_channels, path_loss, sample_rayleigh,
                                sample_rician, los_bs_to_ris)
from crsma_ris.config import SystemConfig


def test_path_loss_reference_distance():
    # d = d_0 = 1 m is the identity case: 10^(-30/10) = 1e-3
    assert path_loss(1.0, 2.2, -30.0) == pytest.approx(1.0e-3, rel=1e-12)


def test_path_loss_zero_exponent():
    for d in (1.0, 7.0, 80.0, 1234.5):
        assert path_loss(d, 0.0, -30.0) == pytest.approx(1.0e-3, rel=1e-12)


def test_path_loss_hand_value():
    # rho0 * d^-eta = 1e-3 * 80^-4
    assert path_loss(80.0, 4.0, -30.0) == pytest.approx(1e-3 * 80.0 ** -4, rel=1e-12)
    assert path_loss(80.0, 4.0, -30.0) == pytest.approx(2.441e-11, rel=1e-3)


def test_path_loss_rejects_nonpositive_distance():
    with pytest.raises(ValueError):
        path_loss(0.0, 2.0, -30.0)
    with pytest.raises(ValueError):
        path_loss(-3.0, 2.0, -30.0)


def test_rayleigh_zero_pl_is_zero():
    rng = np.random.default_rng(0)
    assert np.all(sample_rayleigh(4, 3, 0.0, rng) == 0)


def test_rayleigh_moments():
    rng = np.random.default_rng(1)
    pl = 0.37
    g = sample_rayleigh(100_000, 1, pl, rng)
    # mean within a 3-sigma standard-error band
    se = np.sqrt(pl / 2 / g.size)
    assert abs(g.real.mean()) < 3 * se
    assert abs(g.imag.mean()) < 3 * se
    assert np.mean(np.abs(g) ** 2) == pytest.approx(pl, rel=0.02)


def test_rician_los_limit():
    rng = np.random.default_rng(2)
    los = np.exp(1j * np.linspace(0, 3, 8)).reshape(4, 2)
    h = sample_rician(4, 2, 1e12, 0.5, los, rng)
    np.testing.assert_allclose(h, np.sqrt(0.5) * los, atol=1e-4)


def test_rician_zero_factor_is_rayleigh():
    rng = np.random.default_rng(3)
    pl = 0.8
    h = sample_rician(100_000, 1, 0.0, pl, np.ones((100_000, 1)), rng)
    assert np.mean(np.abs(h) ** 2) == pytest.approx(pl, rel=0.02)


def test_rician_zero_pl():
    rng = np.random.default_rng(4)
    assert np.all(sample_rician(3, 3, 2.0, 0.0, np.ones((3, 3)), rng) == 0)


def test_rician_negative_factor_rejected():
    rng = np.random.default_rng(5)
    with pytest.raises(ValueError):
        sample_rician(2, 2, -0.1, 1.0, np.ones((2, 2)), rng)


def test_rician_k_factor():
    # empirical LoS power / scattered power within 5% of the configured factor
    rng = np.random.default_rng(6)
    lam, pl, n = 3.0, 1.0, 100_000
    los = np.ones((n, 1))
    h = sample_rician(n, 1, lam, pl, los, rng)
    los_part = np.sqrt(pl * lam / (1 + lam))
    scattered = h - los_part * los
    k_emp = los_part ** 2 / np.mean(np.abs(scattered) ** 2)
    assert k_emp == pytest.approx(lam, rel=0.05)


def test_generate_channels_shapes_and_determinism():
    cfg = SystemConfig(n_antennas=4, n_ris_elements=16)
    ch1 = generate_channels(cfg, np.random.default_rng(42))
    ch2 = generate_channels(cfg, np.random.default_rng(42))
    assert ch1.h_b1.shape == (4,)
    assert ch1.H_br.shape == (4, 16)
    assert ch1.h_r2.shape == (16,)
    for name in ("h_b1", "h_b2", "H_br", "h_r1", "h_r2", "hhat_r2", "h_1r"):
        np.testing.assert_array_equal(getattr(ch1, name), getattr(ch2, name))
    assert ch1.h_12 == ch2.h_12
    assert ch1.digest() == ch2.digest()


def test_generate_channels_no_ris():
    cfg = SystemConfig(n_ris_elements=0)
    ch = generate_channels(cfg, np.random.default_rng(0))
    assert ch.H_br.shape == (4, 0)
    assert ch.h_r1.shape == (0,)
    assert np.all(np.isfinite(ch.h_b1))


def test_bs_far_geometry_feeds_path_loss():
    cfg = SystemConfig()
    d = cfg.distance("bs", "far")
    assert d == pytest.approx(np.sqrt(80.0 ** 2 + 10.0 ** 2), rel=1e-12)
    # mean |h_b2|^2 per antenna approaches rho0 * d^-eta_bf
    rng = np.random.default_rng(7)
    pl = path_loss(d, cfg.pl_exponents["bf"], cfg.rho0_db)
    samples = [generate_channels(cfg.replace(n_antennas=1, n_ris_elements=0), rng).h_b2
               for _ in range(20_000)]
    emp = np.mean(np.abs(np.concatenate(samples)) ** 2)
    assert emp == pytest.approx(pl, rel=0.05)


def test_distance_scaling_law():
    # doubling a link distance scales mean channel power by 2^-eta
    cfg = SystemConfig(n_antennas=1, n_ris_elements=0)
    far2 = cfg.replace(pos_far=(160.0, -10.0, 0.0))  # doubles the BS-far vector
    d1, d2 = cfg.distance("bs", "far"), far2.distance("bs", "far")
    assert d2 == pytest.approx(2 * d1, rel=1e-12)
    rng1, rng2 = np.random.default_rng(8), np.random.default_rng(8)
    p1 = np.mean([abs(generate_channels(cfg, rng1).h_b2[0]) ** 2 for _ in range(20_000)])
    p2 = np.mean([abs(generate_channels(far2, rng2).h_b2[0]) ** 2 for _ in range(20_000)])
    assert p2 / p1 == pytest.approx(2.0 ** -cfg.pl_exponents["bf"], rel=0.05)


def test_los_component_unit_modulus():
    cfg = SystemConfig(n_antennas=4, n_ris_elements=8)
    los = los_bs_to_ris(cfg)
    np.testing.assert_allclose(np.abs(los), 1.0, atol=1e-12)

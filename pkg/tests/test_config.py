import numpy as np
import pytest

from crsma_ris.config import SystemConfig, db_to_linear, dbm_to_watts


def test_linear_conversions_cached():
    cfg = SystemConfig()
    assert cfg.noise_power == pytest.approx(1e-12)
    assert cfg.p_bs == pytest.approx(dbm_to_watts(53.0))
    assert cfg.p_d2d == pytest.approx(1.0)
    assert cfg.rho0 == pytest.approx(1e-3)
    assert db_to_linear(0.0) == 1.0


def test_delta_grid_validation():
    with pytest.raises(ValueError):
        SystemConfig(delta_grid=(0.0, 0.5))
    with pytest.raises(ValueError):
        SystemConfig(delta_grid=(0.5, 0.5))
    with pytest.raises(ValueError):
        SystemConfig(delta_grid=(0.5, 1.2))
    with pytest.raises(ValueError):
        SystemConfig(delta_grid=())


def test_m_zero_is_legal():
    cfg = SystemConfig(n_ris_elements=0)
    assert cfg.n_ris_elements == 0


def test_invalid_fields_rejected():
    with pytest.raises(ValueError):
        SystemConfig(n_antennas=0)
    with pytest.raises(ValueError):
        SystemConfig(n_ris_elements=-1)
    with pytest.raises(ValueError):
        SystemConfig(rician_factor=-1.0)
    with pytest.raises(ValueError):
        SystemConfig(tol_sca=0.0)
    with pytest.raises(ValueError):
        SystemConfig(pl_exponents={"br": 2.2})


def test_yaml_round_trip(tmp_path):
    cfg = SystemConfig(n_ris_elements=12, rate_thresholds=(1.0, 2.5), rng_seed=7)
    path = tmp_path / "cfg.yaml"
    cfg.to_yaml(path)
    loaded = SystemConfig.from_yaml(path)
    assert loaded == cfg


def test_default_config_file_matches_defaults():
    import pathlib
    root = pathlib.Path(__file__).resolve().parents[1]
    cfg = SystemConfig.from_yaml(root / "configs" / "default.yaml")
    assert cfg == SystemConfig()


def test_geometry_distances():
    cfg = SystemConfig()
    assert cfg.distance("bs", "ris") == pytest.approx(80.0)
    assert cfg.distance("ris", "far") == pytest.approx(10.0)
    assert cfg.distance("near", "far") == pytest.approx(40.0)
    assert cfg.distance("bs", "near") == pytest.approx(np.hypot(40.0, 10.0))

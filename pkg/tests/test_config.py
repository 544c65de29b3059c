import math

import pytest

from twinwell.config import (
    InitialState,
    LossRates,
    PhysicalCouplings,
    config_hash,
    preset_couplings,
    validate_config,
)
from twinwell.errors import ConfigError


def test_all_defaults_accepted():
    cfg = validate_config({})
    assert cfg.couplings.kappa1 == 0.0 and cfg.couplings.kappa2 == 0.0
    assert not cfg.losses.enabled
    assert cfg.initial.N_A == 200.0 and cfg.initial.N_B == 200.0
    assert len(cfg.sweep.taus) == 400
    assert cfg.sweep.taus[0] == 0.0 and cfg.sweep.taus[-1] == pytest.approx(0.2)


def test_preset_ratios():
    c = preset_couplings("B9p116G", 200.0)
    assert c.g11 == 1.0 / 200.0
    assert c.g12 / c.g11 == pytest.approx(80.8 / 100.4, rel=1e-15)
    assert c.g22 / c.g11 == pytest.approx(95.5 / 100.4, rel=1e-15)
    c = preset_couplings("B9p086G", 2000.0)
    assert c.g12 / c.g11 == pytest.approx(107.8 / 100.4, rel=1e-15)
    c = preset_couplings("NoCrossCoupling", 200.0)
    assert c.g12 == 0.0 and c.g22 == c.g11 == 1.0 / 200.0


def test_preset_unknown_tag():
    with pytest.raises(ConfigError, match="tag"):
        preset_couplings("B9p999G", 200.0)


def test_preset_scaling_round_trip():
    # rescaling N -> c N divides every coupling by c exactly (powers of two)
    for tag in ("B9p116G", "B9p086G", "NoCrossCoupling"):
        base = preset_couplings(tag, 125.0)
        for c in (2.0, 4.0, 8.0):
            scaled = preset_couplings(tag, 125.0 * c)
            assert scaled.g11 == base.g11 / c
            assert scaled.g12 == base.g12 / c
            assert scaled.g22 == base.g22 / c


def test_preset_pure_data():
    a = preset_couplings("B9p116G", 321.0)
    b = preset_couplings("B9p116G", 321.0)
    assert a == b


def test_negative_rate_names_field():
    with pytest.raises(ConfigError, match="gamma12"):
        validate_config({"losses": {"gamma12": -1.0}})
    with pytest.raises(ConfigError, match="gamma12"):
        LossRates(gamma12=-1.0)


def test_empty_tau_grid_rejected():
    with pytest.raises(ConfigError, match="tau_grid"):
        validate_config({"sweep": {"tau_grid": []}})


def test_non_monotone_grid_rejected():
    with pytest.raises(ConfigError, match="tau_grid"):
        validate_config({"sweep": {"tau_grid": [0.0, 0.2, 0.1]}})


def test_unknown_keys_rejected():
    with pytest.raises(ConfigError, match="unknown key"):
        validate_config({"wigner": {"dt": 1e-4}})
    with pytest.raises(ConfigError, match="unknown key"):
        validate_config({"frobnicate": {}})


def test_preset_and_couplings_conflict():
    with pytest.raises(ConfigError, match="not both"):
        validate_config({"preset": {"tag": "B9p116G"}, "couplings": {"g11": 0.01}})


def test_kappa_fills_both_rates():
    cfg = validate_config({"preset": {"tag": "B9p116G", "kappa": 0.3}})
    assert cfg.couplings.kappa1 == cfg.couplings.kappa2 == 0.3
    cfg = validate_config({"couplings": {"g11": 0.01, "kappa": 0.7}})
    assert cfg.couplings.kappa1 == cfg.couplings.kappa2 == 0.7


def test_error_collects_all_fields():
    try:
        validate_config(
            {"losses": {"gamma1": -1, "gamma22": -2}, "initial": {"N_A": 0}}
        )
    except ConfigError as exc:
        text = str(exc)
        assert "gamma1" in text and "gamma22" in text and "N_A" in text
    else:
        pytest.fail("expected ConfigError")


def test_bad_stepper_and_loss_mode():
    with pytest.raises(ConfigError, match="stepper"):
        validate_config({"wigner": {"stepper": "rk4"}})
    with pytest.raises(ConfigError, match="linear_loss_mode"):
        validate_config({"wigner": {"linear_loss_mode": "everything"}})


def test_chunk_divisibility():
    with pytest.raises(ConfigError, match="multiple of chunk_size"):
        validate_config({"wigner": {"n_traj": 1001, "chunk_size": 500}})


def test_validity_warning_for_small_n():
    with pytest.warns(UserWarning, match="N_A < 50"):
        validate_config({"initial": {"N_A": 20}})


def test_initial_state_amplitudes():
    init = InitialState(N_A=200.0, N_B=50.0)
    assert abs(init.alpha_a) ** 2 == pytest.approx(100.0, rel=1e-15)
    assert abs(init.alpha_b) ** 2 == pytest.approx(25.0, rel=1e-15)
    rot = InitialState(N_A=200.0, phase=0.7)
    assert abs(rot.alpha_a) == pytest.approx(math.sqrt(100.0), rel=1e-15)


def test_couplings_validation():
    with pytest.raises(ConfigError, match="g11"):
        PhysicalCouplings(g11=0.0, g12=0.0, g22=0.0)
    with pytest.raises(ConfigError, match="kappa1"):
        PhysicalCouplings(g11=1.0, g12=0.0, g22=1.0, kappa1=-0.1)


def test_config_hash_stable_under_key_order():
    a = validate_config({"initial": {"N_A": 100, "N_B": 100}})
    b = validate_config({"initial": {"N_B": 100, "N_A": 100}})
    assert config_hash(a) == config_hash(b)
    c = validate_config({"initial": {"N_A": 101, "N_B": 100}})
    assert config_hash(a) != config_hash(c)

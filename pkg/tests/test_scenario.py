import dataclasses
import json

import pytest

import tcslsim as t
from tcslsim.errors import (
    ConfigValidationError,
    DistanceOutOfRangeError,
    MalformedOverrideError,
    NonPositiveDropsError,
)
from tcslsim.scenario import parse_override_file

# The full measured parameter table, frozen field by field.
EXPECTED_TABLE = {
    "28GHz-LOS": dict(
        n_c_max=5, lambda_c=None, beta_s=0.8, mu_s=2.4,
        cluster_delay_family="lognormal", mu_tau=2.7, sigma_tau=1.4,
        mu_rho=2.6, mti=6.0, gamma_cluster=38.7, sigma_z=5.0,
        gamma_subpath=2.5, sigma_u=7.0, l_aod_max=2, l_aoa_max=2,
        mu_l_zod=-7.3, sigma_l_zod=3.8, mu_l_zoa=7.4, sigma_l_zoa=3.8,
        sigma_phi_aod=23.5, sigma_theta_aod=16.0,
        sigma_phi_aoa=19.3, sigma_theta_aoa=14.5,
        ple=1.2, sigma_sf=0.0,
    ),
    "28GHz-NLOS": dict(
        n_c_max=None, lambda_c=3.4, beta_s=0.6, mu_s=4.1,
        cluster_delay_family="exponential", mu_tau=12.1, sigma_tau=None,
        mu_rho=15.7, mti=6.0, gamma_cluster=20.1, sigma_z=7.0,
        gamma_subpath=5.0, sigma_u=8.0, l_aod_max=2, l_aoa_max=3,
        mu_l_zod=-5.5, sigma_l_zod=2.9, mu_l_zoa=5.5, sigma_l_zoa=2.9,
        sigma_phi_aod=31.6, sigma_theta_aod=15.6,
        sigma_phi_aoa=25.5, sigma_theta_aoa=14.6,
        ple=2.8, sigma_sf=0.0,
    ),
    "140GHz-LOS": dict(
        n_c_max=4, lambda_c=None, beta_s=0.8, mu_s=1.0,
        cluster_delay_family="exponential", mu_tau=18.6, sigma_tau=None,
        mu_rho=2.2, mti=6.0, gamma_cluster=6.0, sigma_z=3.0,
        gamma_subpath=1.4, sigma_u=5.0, l_aod_max=2, l_aoa_max=2,
        mu_l_zod=-6.8, sigma_l_zod=4.9, mu_l_zoa=7.4, sigma_l_zoa=4.5,
        sigma_phi_aod=4.8, sigma_theta_aod=4.2,
        sigma_phi_aoa=4.8, sigma_theta_aoa=4.3,
        ple=2.0, sigma_sf=0.0,
    ),
    "140GHz-NLOS": dict(
        n_c_max=None, lambda_c=1.3, beta_s=1.0, mu_s=1.0,
        cluster_delay_family="exponential", mu_tau=23.5, sigma_tau=None,
        mu_rho=2.2, mti=6.0, gamma_cluster=13.4, sigma_z=5.0,
        gamma_subpath=2.0, sigma_u=6.0, l_aod_max=2, l_aoa_max=2,
        mu_l_zod=-2.5, sigma_l_zod=2.7, mu_l_zoa=4.8, sigma_l_zoa=2.8,
        sigma_phi_aod=5.1, sigma_theta_aod=4.1,
        sigma_phi_aoa=5.4, sigma_theta_aoa=4.2,
        ple=3.0, sigma_sf=0.0,
    ),
}


def test_exactly_four_scenarios():
    assert len(t.ALL_SCENARIOS) == 4
    assert len({s.label() for s in t.ALL_SCENARIOS}) == 4


@pytest.mark.parametrize("text,label", [
    ("28GHz-LOS", "28GHz-LOS"),
    ("28-los", "28GHz-LOS"),
    ("140_nlos", "140GHz-NLOS"),
    ("140 NLOS", "140GHz-NLOS"),
])
def test_scenario_parse(text, label):
    assert t.Scenario.parse(text).label() == label


def test_scenario_parse_rejects_garbage():
    with pytest.raises(ValueError):
        t.Scenario.parse("60GHz-LOS")


def test_table_roundtrip_verbatim():
    dumped = t.params_table()
    assert dumped == EXPECTED_TABLE


def test_lookup_examples_28_nlos():
    p = t.lookup_params(t.Scenario.parse("28-nlos"))
    assert p.lambda_c == 3.4
    assert p.beta_s == 0.6
    assert p.mu_s == 4.1
    assert p.mu_tau == 12.1
    assert p.mu_rho == 15.7
    assert p.gamma_cluster == 20.1
    assert p.sigma_z == 7.0
    assert p.gamma_subpath == 5.0
    assert p.sigma_u == 8.0
    assert (p.l_aod_max, p.l_aoa_max) == (2, 3)


def test_lookup_examples_140_los():
    p = t.lookup_params(t.Scenario.parse("140-los"))
    assert p.n_c_max == 4
    assert p.beta_s == 0.8
    assert p.mu_s == 1.0
    assert p.mu_tau == 18.6
    assert p.cluster_delay_family == "exponential"
    assert p.gamma_cluster == 6.0
    assert p.sigma_z == 3.0


def test_lookup_examples_28_los():
    p = t.lookup_params(t.Scenario.parse("28-los"))
    assert p.cluster_delay_family == "lognormal"
    assert (p.mu_tau, p.sigma_tau) == (2.7, 1.4)
    assert p.ple == 1.2


def test_lookup_is_pure():
    s = t.Scenario.parse("140-nlos")
    assert t.lookup_params(s) == t.lookup_params(s)
    assert t.lookup_params(s) is t.lookup_params(s)


def test_exactly_one_cluster_count_parameter():
    for s in t.ALL_SCENARIOS:
        p = t.lookup_params(s)
        assert (p.n_c_max is None) != (p.lambda_c is None)
        if s.is_los:
            assert p.n_c_max is not None
        else:
            assert p.lambda_c is not None


def test_params_json_serializable():
    json.dumps(t.params_table())


def test_validate_accepts_measured_min_distance():
    cfg = t.SimConfig(scenario=t.ALL_SCENARIOS[0], distance_m=3.9)
    assert t.validate_config(cfg).distance_m == 3.9


def test_validate_rejects_below_reference():
    cfg = t.SimConfig(scenario=t.ALL_SCENARIOS[0], distance_m=0.5)
    with pytest.raises(ConfigValidationError) as exc:
        t.validate_config(cfg)
    assert any(isinstance(v, DistanceOutOfRangeError) for v in exc.value.violations)


def test_validate_rejects_zero_drops():
    cfg = t.SimConfig(scenario=t.ALL_SCENARIOS[0], num_drops=0)
    with pytest.raises(ConfigValidationError) as exc:
        t.validate_config(cfg)
    assert any(isinstance(v, NonPositiveDropsError) for v in exc.value.violations)


def test_validate_collects_every_violation():
    cfg = t.SimConfig(scenario=t.ALL_SCENARIOS[0], distance_m=0.2, num_drops=-3,
                      overrides={"no_such": "1"})
    with pytest.raises(ConfigValidationError) as exc:
        t.validate_config(cfg)
    kinds = {type(v) for v in exc.value.violations}
    assert {DistanceOutOfRangeError, NonPositiveDropsError, MalformedOverrideError} <= kinds


def test_validate_distance_range():
    cfg = t.SimConfig(scenario=t.ALL_SCENARIOS[0], distance_m=(5.0, 45.0))
    assert t.validate_config(cfg).distance_range() == (5.0, 45.0)
    with pytest.raises(ConfigValidationError):
        t.validate_config(t.SimConfig(scenario=t.ALL_SCENARIOS[0], distance_m=(45.0, 5.0)))


def test_validate_master_seed_bounds():
    with pytest.raises(ConfigValidationError):
        t.validate_config(t.SimConfig(scenario=t.ALL_SCENARIOS[0], master_seed=-1))
    t.validate_config(t.SimConfig(scenario=t.ALL_SCENARIOS[0], master_seed=2**64 - 1))


def test_apply_overrides_changes_one_field():
    base = t.lookup_params(t.Scenario.parse("28-nlos"))
    out = t.apply_overrides(base, {"mu_rho": "3.5"})
    assert out.mu_rho == 3.5
    assert dataclasses.replace(out, mu_rho=base.mu_rho) == base


def test_apply_overrides_unknown_key():
    base = t.lookup_params(t.Scenario.parse("28-nlos"))
    with pytest.raises(MalformedOverrideError):
        t.apply_overrides(base, {"mu_bogus": "1"})


def test_apply_overrides_bad_value():
    base = t.lookup_params(t.Scenario.parse("28-nlos"))
    with pytest.raises(MalformedOverrideError):
        t.apply_overrides(base, {"mu_rho": "not-a-number"})


def test_apply_overrides_invariant_violation():
    base = t.lookup_params(t.Scenario.parse("28-nlos"))
    with pytest.raises(MalformedOverrideError):
        t.apply_overrides(base, {"beta_s": "1.5"})


def test_override_file_parsing(tmp_path):
    path = tmp_path / "o.cfg"
    path.write_text("# comment\nmu_rho = 4.0\nsigma_u=2.0  # trailing\n\n")
    assert parse_override_file(path) == {"mu_rho": "4.0", "sigma_u": "2.0"}
    bad = tmp_path / "bad.cfg"
    bad.write_text("mu_rho 4.0\n")
    with pytest.raises(MalformedOverrideError):
        parse_override_file(bad)


def test_resolved_params_uses_overrides():
    cfg = t.validate_config(t.SimConfig(scenario=t.Scenario.parse("140-los"),
                                        overrides={"gamma_cluster": "9.0"}))
    assert t.resolved_params(cfg).gamma_cluster == 9.0

import math

import pytest

from hapsar.config import FILE, SHIPPED, load_scenario, loads_scenario, scenario_from_dict, shipped_scenario
from hapsar.errors import ConfigError

# system-parameter table of the source publication
TABLE2 = {"M": 3, "f_hz": 2e9, "G_db": 20.0, "T_p": 1e-6, "PRF": 1000.0, "B_hz": 100e6, "bs": (0.0, 0.0, 0.0),
          "alpha_deg": 15.0, "beta_deg": 25.0, "P_rad_dbm": 46.0, "P_com_dbm": 40.0, "snr_min_db": -10.0}


def test_shipped_scenario_matches_table(desk):
    assert desk.name == "paper_table2"
    assert desk.M == TABLE2["M"]
    assert desk.mission.beta == pytest.approx(math.radians(TABLE2["beta_deg"]))
    assert desk.mission.alpha == pytest.approx(math.radians(TABLE2["alpha_deg"]))
    r, c = desk.radar, desk.comm
    assert r.PRF == TABLE2["PRF"] and r.T_p == TABLE2["T_p"]
    assert r.B_w == c.B_c == TABLE2["B_hz"]
    assert r.G_t == pytest.approx(100.0) and r.G_r == pytest.approx(100.0)
    assert r.wavelength == pytest.approx(299792458.0 / TABLE2["f_hz"])
    assert r.P_rad_max == pytest.approx(39.81, abs=5e-3)
    assert r.P_rad_max == pytest.approx(10 ** (TABLE2["P_rad_dbm"] / 10) / 1000, rel=1e-12)
    assert c.P_com_max == pytest.approx(10.0, rel=1e-12)
    assert r.snr_min == pytest.approx(0.1, rel=1e-12)
    assert tuple(c.bs_position) == TABLE2["bs"]


def test_missing_bank_angle_gets_flagged_default():
    sc = loads_scenario("platform:\n  weight_n: 4000.0\n")
    assert sc.platform.zeta == pytest.approx(math.radians(10.0))
    assert sc.provenance["platform.bank_angle_deg"] == SHIPPED
    assert sc.provenance["platform.weight_n"] == FILE


def test_wide_beam_rejected():
    with pytest.raises(ConfigError):
        loads_scenario("mission:\n  look_angle_deg: 10.0\n  beam_width_deg: 20.0\n")


def test_unknown_keys_rejected():
    with pytest.raises(ConfigError, match="unknown key"):
        loads_scenario("radar:\n  prf: 1000\n")
    with pytest.raises(ConfigError, match="unknown scenario section"):
        loads_scenario("rader: {}\n")


def test_parse_error_carries_line():
    with pytest.raises(ConfigError, match="line 3"):
        loads_scenario("mission:\n  sweeps: 3\n  slot_cap: 4: 5\n")


def test_bad_value_names_key():
    with pytest.raises(ConfigError, match="mission.sweeps"):
        scenario_from_dict({"mission": {"sweeps": "three"}})


def test_altitude_box_outside_layer():
    with pytest.raises(ConfigError, match="layer"):
        scenario_from_dict({"platform": {"altitude_max_m": 35000.0}})


def test_missing_file():
    with pytest.raises(ConfigError, match="cannot read"):
        load_scenario("/nonexistent/scenario.yaml")


def test_digest_tracks_content(desk):
    assert desk.digest() == shipped_scenario().digest()
    other = desk.with_overrides(platform={"W": 4000.0})
    assert other.digest() != desk.digest()
    assert other.platform.W == 4000.0 and desk.platform.W == 4410.0


def test_db_conversions():
    sc = scenario_from_dict({"comm": {"reference_gain_db": -55.0, "noise_power_dbm": -90.0}})
    assert sc.comm.rho_0 == pytest.approx(10 ** -5.5, rel=1e-12)
    assert sc.comm.noise_power == pytest.approx(1e-12, rel=1e-12)
    assert sc.atmosphere.L_b == pytest.approx(0.0067)

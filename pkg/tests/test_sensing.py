import math

import numpy as np
import pytest

from hapsar.errors import ConfigError, SingularGeometryError
from hapsar.sensing import (CommSpec, RadarSpec, backhaul_rate, link_distance, link_feasible, min_comm_power,
                            min_radar_power, radar_snr, radar_snr_slant, rate_coefficients, sar_data_rate,
                            snr_constant, unambiguous_ranges)

# mpmath oracle values, frozen
NEAR_20 = 20970.58250281621357
FAR_20 = 23713.78094868321381
DMIN_20 = 1930065.015089205639

RADAR = RadarSpec()
COMM = CommSpec()


def test_ranges_example(geo):
    near, far = unambiguous_ranges(20000.0, geo)
    assert near == pytest.approx(NEAR_20, rel=1e-12)
    assert far == pytest.approx(FAR_20, rel=1e-12)


def test_data_rate(geo):
    assert sar_data_rate(20000.0, RADAR, geo) == pytest.approx(DMIN_20, rel=1e-12)
    assert sar_data_rate(0.0, RADAR, geo) == pytest.approx(1e5, rel=1e-12)
    z = np.linspace(20000, 32000, 64)
    assert np.all(np.diff(sar_data_rate(z, RADAR, geo)) > 0)


def test_snr_scaling(geo):
    assert radar_snr(0.0, 20000.0, 100.0, RADAR, geo) == 0.0
    s1 = radar_snr(30.0, 12000.0, 100.0, RADAR, geo)
    s2 = radar_snr(30.0, 24000.0, 100.0, RADAR, geo)
    assert s1 / s2 == pytest.approx(8.0, rel=1e-13)


def test_snr_forms_agree(geo, rng):
    P = rng.uniform(0, 40, 100)
    z = rng.uniform(20000, 32000, 100)
    V = rng.uniform(10, 240, 100)
    R0 = z / math.cos(geo.beta)
    delta = math.pi / 2 - geo.beta
    np.testing.assert_allclose(radar_snr(P, z, V, RADAR, geo), radar_snr_slant(P, R0, V, delta, RADAR), rtol=1e-12)


def test_snr_constant_equivalence(geo, rng):
    con = snr_constant(RADAR, geo)
    assert con > 0
    half = snr_constant(RadarSpec(snr_min=0.2), geo)
    assert half == pytest.approx(con / 2, rel=1e-14)
    P = rng.uniform(0, 40, 100)
    z = rng.uniform(20000, 32000, 100)
    V = rng.uniform(10, 240, 100)
    lhs = radar_snr(P, z, V, RADAR, geo) > RADAR.snr_min
    rhs = P * con > z ** 3 * V
    np.testing.assert_array_equal(lhs, rhs)


def test_min_radar_power_meets_floor(geo):
    P = min_radar_power(25000.0, 150.0, RADAR, geo)
    assert radar_snr(P, 25000.0, 150.0, RADAR, geo) > RADAR.snr_min
    assert radar_snr(P * (1 - 1e-5), 25000.0, 150.0, RADAR, geo) < RADAR.snr_min


def test_link_distance_examples():
    assert link_distance((0.0, 0.0, 0.0), COMM) == 0.0
    assert link_distance((3.0, 4.0, 0.0), COMM) == 5.0
    R, z = 12000.0, 25000.0
    ang = np.linspace(0, 2 * np.pi, 13)
    pos = np.vstack([R * np.cos(ang), R * np.sin(ang), np.full(13, z)])
    np.testing.assert_allclose(link_distance(pos, COMM), math.hypot(R, z), rtol=1e-14)


def test_backhaul_rate_examples():
    pos = (3.0, 4.0, 0.0)
    assert backhaul_rate(0.0, pos, COMM) == 0.0
    unit = COMM.noise_power * 25.0 / COMM.rho_0
    assert backhaul_rate(unit, pos, COMM) == pytest.approx(COMM.B_c, rel=1e-14)
    with pytest.raises(SingularGeometryError):
        backhaul_rate(1.0, (0.0, 0.0, 0.0), COMM)


def test_link_feasible(geo):
    pos = (9000.0, 0.0, 20000.0)
    ok, slack = link_feasible(0.0, pos, 20000.0, RADAR, COMM, geo)
    assert not ok and slack == pytest.approx(-DMIN_20, rel=1e-12)
    P = min_comm_power(pos, 20000.0, RADAR, COMM, geo)
    ok, slack = link_feasible(P, pos, 20000.0, RADAR, COMM, geo)
    assert not ok and abs(slack - COMM.rate_margin) < 1e-3
    ok, _ = link_feasible(P * 1.001, pos, 20000.0, RADAR, COMM, geo)
    assert ok


def test_rate_coefficients_reproduce_threshold(geo, rng):
    a, b = rate_coefficients(RADAR, COMM, geo)
    z = rng.uniform(20000, 32000, 20)
    np.testing.assert_allclose(b * 2.0 ** (a * z), 2.0 ** (sar_data_rate(z, RADAR, geo) / COMM.B_c), rtol=1e-12)


@pytest.mark.parametrize("kw", [{"B_w": 0.0}, {"PRF": -1.0}, {"snr_margin": -1.0}])
def test_radar_validation(kw):
    with pytest.raises(ConfigError):
        RadarSpec(**kw)


def test_comm_validation():
    with pytest.raises(ConfigError):
        CommSpec(rho_0=0.0)
    with pytest.raises(ConfigError):
        CommSpec(bs_position=(0.0, 0.0))

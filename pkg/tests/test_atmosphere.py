import numpy as np
import pytest

from hapsar.atmosphere import (DEFAULT_ATMOSPHERE, AtmosphereConstants, air_density_at, density_slope,
                               harvest_slope, harvested_power, pressure_at, pressure_ratio, pressure_slope,
                               solar_irradiance, temperature_at)
from hapsar.errors import ConfigError, DomainError

# frozen from a 40-digit mpmath evaluation of the closed forms
P25 = 2631.488003533374200
RHO20 = 0.08803513774035008478
RHO25 = 0.03664715880744777776
PR20 = 0.05403295336787564767
PR25 = 0.02597076736771156378
I20 = 1343.566993404335163
PHAR20 = 13435.66993404335163


def test_table_one_defaults():
    a = DEFAULT_ATMOSPHERE
    assert (a.p_b1, a.g, a.M_air, a.T_b, a.R_univ, a.R_spec) == (5474.889, 9.8, 0.0289644, 216.65, 8.31432, 287.052)
    assert a.L_b == pytest.approx(0.0067, rel=1e-15)
    assert (a.H1, a.H2, a.p_0, a.I_0, a.alpha_ext) == (20000.0, 32000.0, 101325.0, 1367.0, 0.32)


def test_temperature_examples():
    assert temperature_at(20000.0) == 216.65
    assert temperature_at(25000.0) == pytest.approx(250.15, rel=1e-14)


def test_pressure_examples():
    assert pressure_at(20000.0) == pytest.approx(5474.889, rel=1e-12)
    assert pressure_at(25000.0) == pytest.approx(P25, rel=1e-12)


def test_density_examples():
    assert air_density_at(20000.0) == pytest.approx(RHO20, rel=1e-12)
    assert air_density_at(25000.0) == pytest.approx(RHO25, rel=1e-12)
    doubled = AtmosphereConstants(p_b1=2 * 5474.889)
    assert air_density_at(20000.0, doubled) == pytest.approx(2 * RHO20, rel=1e-12)


def test_pressure_ratio_and_irradiance():
    assert pressure_ratio(20000.0) == pytest.approx(PR20, rel=1e-12)
    assert pressure_ratio(25000.0) == pytest.approx(PR25, rel=1e-12)
    assert solar_irradiance(20000.0) == pytest.approx(I20, rel=1e-12)
    z = np.linspace(20000, 32000, 50)
    assert np.all((pressure_ratio(z) > 0) & (pressure_ratio(z) < 1))


def test_harvest_examples():
    assert harvested_power(20000.0, 0.2, 50.0) == pytest.approx(PHAR20, rel=1e-12)
    assert harvested_power(25000.0, 0.2, 150.0) == pytest.approx(3 * harvested_power(25000.0, 0.2, 50.0))
    # zero air mass limit: a vanishing base pressure leaves the solar constant
    thin = AtmosphereConstants(p_b1=1e-300)
    assert harvested_power(20000.0, 1.0, 1.0, thin) == pytest.approx(1367.0, rel=1e-12)


@pytest.mark.parametrize("bad", [(0.0, 1.0), (1.2, 1.0), (0.5, 0.0), (0.5, -3.0)])
def test_harvest_rejects_bad_panel(bad):
    with pytest.raises(ConfigError):
        harvested_power(25000.0, *bad)


@pytest.mark.parametrize("z", [19999.0, 33000.0, -1.0])
def test_out_of_layer(z):
    for fn in (temperature_at, pressure_at, air_density_at, solar_irradiance):
        with pytest.raises(DomainError, match="20000"):
            fn(z)


def test_monotone_on_grid():
    z = np.linspace(20000, 32000, 1000)
    assert np.all(np.diff(pressure_at(z)) < 0)
    assert np.all(np.diff(solar_irradiance(z)) > 0)


def test_density_composition():
    z = np.linspace(20000, 32000, 1000)
    np.testing.assert_allclose(air_density_at(z), pressure_at(z) / (287.052 * temperature_at(z)), rtol=1e-12)


@pytest.mark.parametrize("fn,slope,args", [
    (pressure_at, pressure_slope, ()),
    (air_density_at, density_slope, ()),
    (harvested_power, harvest_slope, (0.2, 50.0)),
])
def test_slopes_match_central_differences(fn, slope, args):
    z = np.linspace(20100, 31900, 7)
    h = 0.5
    fd = (fn(z + h, *args) - fn(z - h, *args)) / (2 * h)
    np.testing.assert_allclose(slope(z, *args), fd, rtol=1e-6)


def test_constants_validation():
    with pytest.raises(ConfigError):
        AtmosphereConstants(H1=32000.0, H2=20000.0)
    with pytest.raises(ConfigError):
        AtmosphereConstants(L_b=0.0)

"""Lower-stratosphere atmosphere and solar irradiance.

One gradient layer between H1 and H2. Every function accepts a scalar or
an array of altitudes in metres and refuses altitudes outside the layer.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError


@dataclass(frozen=True)
class AtmosphereConstants:
    p_b1: float = 5474.889      # Pa, pressure at H1
    g: float = 9.8              # m/s^2
    M_air: float = 0.0289644    # kg/mol
    T_b: float = 216.65         # K
    L_b: float = 0.0067         # K/m (6.7 K/km)
    R_univ: float = 8.31432     # N m/(mol K)
    R_spec: float = 287.052     # J/(kg K)
    H1: float = 20000.0         # m
    H2: float = 32000.0         # m
    p_0: float = 101325.0       # Pa, ground pressure
    I_0: float = 1367.0         # W/m^2
    alpha_ext: float = 0.32

    def __post_init__(self):
        for name in ("p_b1", "g", "M_air", "T_b", "L_b", "R_univ", "R_spec",
                     "H1", "H2", "p_0", "I_0", "alpha_ext"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise ConfigError(f"atmosphere.{name} must be positive, got {value}")
        if self.H1 >= self.H2:
            raise ConfigError(f"atmosphere layer needs H1 < H2, got {self.H1} >= {self.H2}")

    @property
    def exponent(self):
        """g*M/(R*L_b), the power in the pressure law."""
        return self.g * self.M_air / (self.R_univ * self.L_b)


DEFAULT_ATMOSPHERE = AtmosphereConstants()


def _check_layer(z, atm):
    z = np.asarray(z, dtype=float)
    # tiny tolerance so that values produced by float arithmetic on the bounds pass
    tol = 1e-9 * atm.H2
    if np.any(~np.isfinite(z)) or np.any(z < atm.H1 - tol) or np.any(z > atm.H2 + tol):
        bad = z[(z < atm.H1 - tol) | (z > atm.H2 + tol) | ~np.isfinite(z)]
        raise DomainError(
            f"altitude {bad.flat[0]:.6g} m outside the valid band "
            f"[{atm.H1:.6g}, {atm.H2:.6g}] m")
    return z


def _out(value):
    return float(value) if np.ndim(value) == 0 else value


def temperature_at(z, atm=DEFAULT_ATMOSPHERE):
    z = _check_layer(z, atm)
    return _out(atm.T_b + atm.L_b * (z - atm.H1))


def pressure_at(z, atm=DEFAULT_ATMOSPHERE):
    z = _check_layer(z, atm)
    ratio = atm.T_b / (atm.T_b + atm.L_b * (z - atm.H1))
    return _out(atm.p_b1 * ratio ** atm.exponent)


def air_density_at(z, atm=DEFAULT_ATMOSPHERE):
    return _out(np.asarray(pressure_at(z, atm)) / (atm.R_spec * np.asarray(temperature_at(z, atm))))


def pressure_ratio(z, atm=DEFAULT_ATMOSPHERE):
    return _out(np.asarray(pressure_at(z, atm)) / atm.p_0)


def solar_irradiance(z, atm=DEFAULT_ATMOSPHERE):
    return _out(atm.I_0 * np.exp(-np.asarray(pressure_ratio(z, atm)) * atm.alpha_ext))


def harvested_power(z, eta_h, A, atm=DEFAULT_ATMOSPHERE):
    if not 0.0 < eta_h <= 1.0:
        raise ConfigError(f"eta_h must lie in (0, 1], got {eta_h}")
    if not A > 0.0:
        raise ConfigError(f"panel area must be positive, got {A}")
    return _out(eta_h * A * np.asarray(solar_irradiance(z, atm)))


# Derivatives in z, used by the convexification layer.

def pressure_slope(z, atm=DEFAULT_ATMOSPHERE):
    """dp/dz in Pa/m."""
    p = np.asarray(pressure_at(z, atm))
    T = np.asarray(temperature_at(z, atm))
    return _out(-atm.exponent * atm.L_b * p / T)


def density_slope(z, atm=DEFAULT_ATMOSPHERE):
    """d(rho)/dz in kg/m^4. rho is proportional to T^-(exponent + 1)."""
    rho = np.asarray(air_density_at(z, atm))
    T = np.asarray(temperature_at(z, atm))
    return _out(-(atm.exponent + 1.0) * atm.L_b * rho / T)


def harvest_slope(z, eta_h, A, atm=DEFAULT_ATMOSPHERE):
    """dP_har/dz in W/m."""
    P = np.asarray(harvested_power(z, eta_h, A, atm))
    return _out(-atm.alpha_ext * P * np.asarray(pressure_slope(z, atm)) / atm.p_0)

"""SAR data rate, imaging SNR and the free-space backhaul link.

All gains, losses and thresholds are linear here; dB conversion happens
once when a scenario is loaded.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import constants

from .errors import ConfigError, SingularGeometryError

SPEED_OF_LIGHT = constants.c
BOLTZMANN = constants.k


@dataclass(frozen=True)
class RadarSpec:
    B_w: float = 100e6
    T_p: float = 1e-6
    PRF: float = 1000.0
    G_t: float = 100.0
    G_r: float = 100.0
    wavelength: float = SPEED_OF_LIGHT / 2e9
    sigma_b: float = 1.0
    K_B: float = BOLTZMANN
    T_sys: float = 290.0
    F_n: float = 10 ** 0.3
    L_s: float = 10 ** 0.3
    snr_min: float = 0.1
    P_rad_max: float = 10 ** 4.6 / 1000.0
    snr_margin: float = 1e-6

    def __post_init__(self):
        for name in ("B_w", "T_p", "PRF", "G_t", "G_r", "wavelength", "sigma_b", "K_B",
                     "T_sys", "F_n", "L_s", "snr_min", "P_rad_max"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise ConfigError(f"radar.{name} must be positive, got {value}")
        if self.snr_margin < 0:
            raise ConfigError("radar.snr_margin must be non-negative")


@dataclass(frozen=True)
class CommSpec:
    B_c: float = 100e6
    rho_0: float = 1e-6
    noise_power: float = 10 ** -12.5
    bs_position: tuple = (0.0, 0.0, 0.0)
    P_com_max: float = 10.0
    rate_margin: float = 1.0

    def __post_init__(self):
        for name in ("B_c", "rho_0", "noise_power", "P_com_max", "rate_margin"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise ConfigError(f"comm.{name} must be positive, got {value}")
        if len(self.bs_position) != 3:
            raise ConfigError("comm.bs_position needs three coordinates")

    @property
    def gain_to_noise(self):
        return self.rho_0 / self.noise_power


def unambiguous_ranges(z, geometry):
    z = np.asarray(z, dtype=float)
    near = z / math.cos(geometry.alpha_2)
    far = z / math.cos(geometry.alpha_1)
    if z.ndim == 0:
        return float(near), float(far)
    return near, far


def sar_data_rate(z, radar, geometry):
    near, far = unambiguous_ranges(z, geometry)
    rate = radar.B_w * ((2.0 / SPEED_OF_LIGHT) * (np.asarray(far) - np.asarray(near)) + radar.T_p) * radar.PRF
    return float(rate) if np.ndim(rate) == 0 else rate


def _radar_numerator(radar):
    return (radar.G_t * radar.G_r * radar.wavelength ** 3 * radar.sigma_b
            * SPEED_OF_LIGHT * radar.T_p * radar.PRF)


def _radar_noise(radar):
    return 256 * math.pi ** 3 * radar.K_B * radar.T_sys * radar.F_n * radar.B_w * radar.L_s


def radar_snr(P_rad, z, V, radar, geometry):
    """Imaging SNR written in altitude, cos^2(beta) absorbing the slant geometry."""
    num = np.asarray(P_rad, dtype=float) * _radar_numerator(radar) * math.cos(geometry.beta) ** 2
    den = _radar_noise(radar) * np.asarray(z, dtype=float) ** 3 * np.asarray(V, dtype=float)
    out = num / den
    return float(out) if np.ndim(out) == 0 else out


def radar_snr_slant(P_rad, R0, V, delta, radar):
    """Imaging SNR written in the slant reference range R0 and incidence angle delta."""
    num = np.asarray(P_rad, dtype=float) * _radar_numerator(radar)
    den = _radar_noise(radar) * np.asarray(R0, dtype=float) ** 3 * np.asarray(V, dtype=float) * np.sin(delta)
    out = num / den
    return float(out) if np.ndim(out) == 0 else out


def snr_constant(radar, geometry):
    """con. such that SNR > snr_min  <=>  P_rad * con. > z^3 V."""
    return _radar_numerator(radar) * math.cos(geometry.beta) ** 2 / (_radar_noise(radar) * radar.snr_min)


def min_radar_power(z, V, radar, geometry, margin=None):
    """Smallest P_rad meeting the SNR floor with the configured margin factor."""
    margin = radar.snr_margin if margin is None else margin
    out = np.asarray(z, dtype=float) ** 3 * np.asarray(V, dtype=float) * (1 + margin) / snr_constant(radar, geometry)
    return float(out) if np.ndim(out) == 0 else out


def link_distance(pos, comm):
    d = np.asarray(pos, dtype=float) - np.asarray(comm.bs_position, dtype=float).reshape(
        (3,) + (1,) * (np.ndim(pos) - 1))
    out = np.sqrt(np.sum(d * d, axis=0))
    return float(out) if np.ndim(out) == 0 else out


def backhaul_rate(P_com, pos, comm):
    d = np.asarray(link_distance(pos, comm))
    if np.any(d == 0):
        raise SingularGeometryError("platform coincides with the base station")
    snr = np.asarray(P_com, dtype=float) * comm.rho_0 / (comm.noise_power * d * d)
    out = comm.B_c * np.log2(1 + snr)
    return float(out) if np.ndim(out) == 0 else out


def link_feasible(P_com, pos, z, radar, comm, geometry):
    """(feasible, slack) where slack = D_c - D_min in bit/s and feasibility needs slack > margin."""
    slack = np.asarray(backhaul_rate(P_com, pos, comm)) - np.asarray(sar_data_rate(z, radar, geometry))
    ok = slack > comm.rate_margin
    if np.ndim(slack) == 0:
        return bool(ok), float(slack)
    return ok, slack


def rate_coefficients(radar, comm, geometry, margin=0.0):
    """(a, b) with 2^(D_min + margin)/B_c = b * 2^(a z)."""
    a = (2 * radar.B_w * radar.PRF / (SPEED_OF_LIGHT * comm.B_c)) * (
        1 / math.cos(geometry.alpha_1) - 1 / math.cos(geometry.alpha_2))
    b = 2.0 ** ((radar.B_w * radar.T_p * radar.PRF + margin) / comm.B_c)
    return a, b


def min_comm_power(pos, z, radar, comm, geometry, margin=None):
    """Smallest P_com giving D_c = D_min + margin."""
    margin = comm.rate_margin if margin is None else margin
    d = np.asarray(link_distance(pos, comm))
    need = (np.asarray(sar_data_rate(z, radar, geometry)) + margin) / comm.B_c
    out = comm.noise_power * d * d / comm.rho_0 * np.expm1(need * math.log(2))
    return float(out) if np.ndim(out) == 0 else out

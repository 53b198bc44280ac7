"""Propulsion power, net power and the battery ledger."""

import math
from dataclasses import dataclass

import numpy as np

from .atmosphere import DEFAULT_ATMOSPHERE, air_density_at
from .errors import ConfigError, EnergyDepletedError

DISCHARGE_MODES = ("multiply", "divide")


@dataclass(frozen=True)
class PlatformSpec:
    eta_p: float = 0.8
    eta_e: float = 0.9
    S_wing: float = 45.0
    C_d0: float = 0.02
    W: float = 4410.0
    e_osw: float = 0.9
    R_wing: float = 20.0
    zeta: float = math.radians(10.0)
    C_L_max: float = 1.5
    eta_b: float = 0.9
    eta_c: float = 0.95
    E_ini: float = 50e6
    eta_h: float = 0.2
    A_panel: float = 50.0
    z_min: float = 20000.0
    z_max: float = 32000.0
    V_max: float = 240.0
    discharge_mode: str = "multiply"
    floor_fraction: float = 1e-3

    def __post_init__(self):
        for name in ("eta_p", "eta_e", "eta_b", "eta_c", "eta_h"):
            value = getattr(self, name)
            if not 0.0 < value <= 1.0:
                raise ConfigError(f"platform.{name} must lie in (0, 1], got {value}")
        for name in ("S_wing", "C_d0", "e_osw", "R_wing", "C_L_max", "E_ini", "A_panel",
                     "z_min", "z_max", "V_max"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise ConfigError(f"platform.{name} must be positive, got {value}")
        if self.W < 0:
            raise ConfigError("platform.W must be non-negative")
        if not 0 < self.zeta < math.pi / 2:
            raise ConfigError("platform.zeta must lie in (0, 90) degrees")
        if self.z_min > self.z_max:
            raise ConfigError(f"z_min = {self.z_min} exceeds z_max = {self.z_max}")
        if self.discharge_mode not in DISCHARGE_MODES:
            raise ConfigError(f"discharge_mode must be one of {DISCHARGE_MODES}")
        if not 0 < self.floor_fraction < 1:
            raise ConfigError("floor_fraction must lie in (0, 1)")

    @property
    def epsilon(self):
        return 1.0 / (math.pi * self.e_osw * self.R_wing)

    @property
    def drive_efficiency(self):
        """cos^2(zeta) eta_p eta_e."""
        return math.cos(self.zeta) ** 2 * self.eta_p * self.eta_e

    @property
    def discharge_factor(self):
        """Multiplier applied to a non-positive net power in the ledger."""
        return self.eta_c if self.discharge_mode == "multiply" else 1.0 / self.eta_c

    @property
    def E_floor(self):
        return self.floor_fraction * self.E_ini


@dataclass
class EnergyLedger:
    energy: np.ndarray
    net_power: np.ndarray
    efficiency_used: np.ndarray


def parasitic_power(z, V, platform, atm=DEFAULT_ATMOSPHERE):
    rho = np.asarray(air_density_at(z, atm))
    V = np.asarray(V, dtype=float)
    return 0.5 * rho * V ** 3 * platform.S_wing * platform.C_d0 / platform.drive_efficiency


def induced_power(z, V, platform, atm=DEFAULT_ATMOSPHERE):
    rho = np.asarray(air_density_at(z, atm))
    V = np.asarray(V, dtype=float)
    return platform.epsilon * 2 * platform.W ** 2 / (rho * platform.S_wing * V) / platform.drive_efficiency


def propulsion_power(z, V, platform, atm=DEFAULT_ATMOSPHERE):
    if np.any(np.asarray(V) <= 0):
        raise ConfigError("speed must be positive")
    out = parasitic_power(z, V, platform, atm) + induced_power(z, V, platform, atm)
    return float(out) if np.ndim(out) == 0 else out


def net_power(P_har, P_mot, P_rad, P_com):
    out = (np.asarray(P_har, dtype=float) - np.asarray(P_mot, dtype=float)
           - np.asarray(P_rad, dtype=float) - np.asarray(P_com, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


def select_efficiency(P_re, platform):
    out = np.where(np.asarray(P_re) > 0, platform.eta_b, platform.eta_c)
    return float(out) if np.ndim(out) == 0 else out


def ledger_factor(P_re, platform):
    """Factor k with E(n) = E(n-1) + k P_re delta_t; equals eta_a unless discharge divides."""
    out = np.where(np.asarray(P_re) > 0, platform.eta_b, platform.discharge_factor)
    return float(out) if np.ndim(out) == 0 else out


def step_ledger(E_prev, P_re, delta_t, platform, slot=None):
    if not E_prev > 0:
        raise EnergyDepletedError(slot if slot is not None else "?", E_prev)
    E = E_prev + ledger_factor(P_re, platform) * P_re * delta_t
    if E <= 0:
        raise EnergyDepletedError(slot if slot is not None else "?", E)
    return E


def run_ledger(P_re, delta_t, platform, E_ini=None):
    """Energy trace over all slots. Slot 1 holds E_ini; its own net power is not drawn.

    Never raises: depletion is for the caller (or the verifier) to judge.
    """
    P_re = np.asarray(P_re, dtype=float)
    E_ini = platform.E_ini if E_ini is None else E_ini
    k = np.asarray(ledger_factor(P_re, platform), dtype=float).reshape(P_re.shape)
    inc = k * P_re * delta_t
    inc[..., 0] = 0.0
    energy = E_ini + np.cumsum(inc, axis=-1)
    eff = np.asarray(select_efficiency(P_re, platform), dtype=float).reshape(P_re.shape)
    return EnergyLedger(energy, P_re, eff)


@dataclass
class PowerSchedule:
    """Per-slot powers (W) and the battery energy trace (J) over all MN slots."""
    P_rad: np.ndarray
    P_com: np.ndarray
    P_mot: np.ndarray
    P_har: np.ndarray
    energy: np.ndarray

    @property
    def P_re(self):
        return net_power(self.P_har, self.P_mot, self.P_rad, self.P_com)

    def __len__(self):
        return len(self.P_rad)


def schedule_from_powers(P_rad, P_com, P_mot, P_har, delta_t, platform):
    """Schedule whose energy trace is the exact ledger of the given powers."""
    P_rad, P_com, P_mot, P_har = (np.asarray(a, dtype=float).copy() for a in (P_rad, P_com, P_mot, P_har))
    ledger = run_ledger(net_power(P_har, P_mot, P_rad, P_com), delta_t, platform)
    return PowerSchedule(P_rad, P_com, P_mot, P_har, ledger.energy)

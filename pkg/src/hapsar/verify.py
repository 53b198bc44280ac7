"""Raw nonlinear feasibility check of a plan and power schedule.

Everything here is recomputed from the model functions in atmosphere,
platform, sensing and energy; nothing is taken from the convex surrogates.
Each constraint group reports its worst signed margin, relative to a
natural scale, so that >= -tol means satisfied.
"""

from dataclasses import dataclass

import numpy as np

from .atmosphere import harvested_power
from .energy import net_power, propulsion_power, run_ledger
from .platform import positions, stall_speed, start_radii
from .sensing import backhaul_rate, sar_data_rate, snr_constant

DEFAULT_TOL = 1e-7

GROUPS = ("C1-C2 start radii", "C6 speed", "C8 link rate", "C9 ledger", "C10 radar power",
          "C11 power caps", "C12 imaging SNR", "C13 initial energy", "C14 energy floor",
          "C15 altitude box", "C16 speed window")


@dataclass
class VerificationReport:
    residuals: dict
    tol: float = DEFAULT_TOL

    @property
    def feasible(self):
        return all(v >= -self.tol for v in self.residuals.values())

    def violations(self):
        return {k: v for k, v in self.residuals.items() if v < -self.tol}

    def worst(self):
        return min(self.residuals.values()) if self.residuals else 0.0


def verify(plan, schedule, scenario, tol=DEFAULT_TOL):
    geo = plan.geometry
    radar, comm, pf, atm = scenario.radar, scenario.comm, scenario.platform, scenario.atmosphere
    M, N = plan.M, plan.N
    MN = M * N
    res = {}
    if len(schedule) != MN:
        raise ValueError(f"schedule covers {len(schedule)} slots, plan has {MN}")
    z = np.asarray(plan.altitudes, dtype=float)
    R = start_radii(z, geo)
    res["C1-C2 start radii"] = -float(np.max(np.abs(R - plan.start_radii)) / np.max(np.abs(R)))
    V = np.sqrt(R * geo.turn_factor)
    res["C6 speed"] = -float(np.max(np.abs(V - plan.speeds) / V))
    x, y, zz = positions(plan)
    Vs = np.repeat(V, N)
    P_rad = np.asarray(schedule.P_rad, dtype=float)
    P_com = np.asarray(schedule.P_com, dtype=float)

    need = sar_data_rate(zz, radar, geo)
    with np.errstate(divide="ignore", invalid="ignore"):
        rate = backhaul_rate(np.maximum(P_com, 0.0), np.vstack([x, y, zz]), comm)
    res["C8 link rate"] = float(np.min((rate - need - comm.rate_margin) / need))

    # ledger from raw propulsion and harvest, with the schedule's radar and comm powers
    P_mot = propulsion_power(zz, Vs, pf, atm)
    P_har = harvested_power(zz, pf.eta_h, pf.A_panel, atm)
    E = run_ledger(net_power(P_har, P_mot, P_rad, P_com), geo.delta_t, pf).energy
    res["C9 ledger"] = -float(np.max(np.abs(np.asarray(schedule.energy) - E)) / pf.E_ini)

    spread = 0.0
    for m in range(M):
        blk = P_rad[m * N:(m + 1) * N]
        spread = max(spread, float(blk.max() - blk.min()))
    res["C10 radar power"] = -spread / radar.P_rad_max

    res["C11 power caps"] = float(min(np.min(radar.P_rad_max - P_rad) / radar.P_rad_max,
                                      np.min(comm.P_com_max - P_com) / comm.P_com_max,
                                      np.min(P_rad) / radar.P_rad_max,
                                      np.min(P_com) / comm.P_com_max))
    con = snr_constant(radar, geo)
    res["C12 imaging SNR"] = float(np.min(P_rad * con / (zz ** 3 * Vs * (1 + radar.snr_margin)) - 1.0))
    res["C13 initial energy"] = -abs(float(schedule.energy[0]) - pf.E_ini) / pf.E_ini
    res["C14 energy floor"] = float(np.min(E - pf.E_floor) / pf.E_ini)
    res["C15 altitude box"] = float(min(np.min(z - pf.z_min), np.min(pf.z_max - z)) / pf.z_max)
    v_min = stall_speed(z, pf.W, pf.S_wing, pf.C_L_max, atm) if pf.W > 0 else np.zeros(M)
    res["C16 speed window"] = float(min(np.min(V - v_min), np.min(pf.V_max - V)) / pf.V_max)
    return VerificationReport(res, tol)

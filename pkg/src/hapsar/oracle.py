"""Exhaustive grid search over per-sweep altitudes, independent of the convex machinery.

For each slot count N and every altitude combination on the grid, radar and
comm powers are set to their smallest admissible values, the raw ledger is
run, and the plan is kept if every constraint holds. The best plan is
re-checked with the shared verifier.
"""

import itertools
from dataclasses import dataclass

import numpy as np

from .atmosphere import harvested_power
from .energy import propulsion_power, run_ledger
from .errors import GridTooLargeError, InfeasibleScenarioError
from .platform import azimuths, coverage_form, stall_speed, start_radius_matrix
from .sensing import min_comm_power, min_radar_power

GRID_LIMIT = 10 ** 6
# stop scanning N after this many consecutive slot counts without a feasible plan
_EMPTY_RUN = 5
_CHUNK = 4096


@dataclass
class OracleResult:
    coverage: float
    N: int
    altitudes: np.ndarray
    plan: object
    schedule: object
    verification: object
    evaluated: int


def grid_size(resolution, M):
    return int(resolution) ** int(M)


def _evaluate(Zs, N, scenario):
    """Coverage of each altitude row in Zs (G x M), NaN where infeasible."""
    geo = scenario.geometry(N)
    pf, radar, comm, atm = scenario.platform, scenario.radar, scenario.comm, scenario.atmosphere
    G, M = Zs.shape
    R = Zs @ start_radius_matrix(geo).T
    V = np.sqrt(R * geo.turn_factor)
    phi = azimuths(N, M)
    Rs = np.repeat(R, N, axis=1)
    zz = np.repeat(Zs, N, axis=1)
    Vs = np.repeat(V, N, axis=1)
    pos = np.stack([Rs * np.cos(phi), Rs * np.sin(phi), zz])
    P_rad = min_radar_power(zz, Vs, radar, geo)
    P_com = min_comm_power(pos, zz, radar, comm, geo)
    P_mot = propulsion_power(zz, Vs, pf, atm)
    P_har = harvested_power(zz, pf.eta_h, pf.A_panel, atm)
    E = run_ledger(P_har - P_mot - P_rad - P_com, geo.delta_t, pf).energy
    ok = np.all(E >= pf.E_floor, axis=1)
    ok &= np.all(P_rad <= radar.P_rad_max, axis=1) & np.all(P_com <= comm.P_com_max, axis=1)
    v_min = stall_speed(Zs, pf.W, pf.S_wing, pf.C_L_max, atm) if pf.W > 0 else np.zeros_like(Zs)
    ok &= np.all(V >= v_min, axis=1) & np.all(V <= pf.V_max, axis=1)
    r = geo.kappa * Zs
    S = geo.sweep_angle * (N - 1) * np.einsum("gi,ij,gj->g", r, coverage_form(M), r)
    return np.where(ok, S, np.nan)


def grid_oracle(scenario, resolution, n_values=None, limit=GRID_LIMIT):
    """Best coverage over an altitude grid of `resolution` points per sweep and all slot counts.

    n_values defaults to 2..N_cap, scanned upward and stopped once several
    consecutive slot counts admit no feasible plan.
    """
    from .sca.algorithm import refine_schedule
    from .verify import verify

    M = scenario.M
    size = grid_size(resolution, M)
    if size > limit:
        raise GridTooLargeError(size, limit)
    pf = scenario.platform
    axis = np.linspace(pf.z_min, pf.z_max, int(resolution))
    Ns = range(2, scenario.mission.N_cap + 1) if n_values is None else n_values
    best = (-np.inf, None, None)
    evaluated = 0
    empty = 0
    seen_feasible = False
    for N in Ns:
        found = False
        combos = itertools.product(axis, repeat=M)
        while True:
            chunk = np.array(list(itertools.islice(combos, _CHUNK)))
            if chunk.size == 0:
                break
            S = _evaluate(chunk.reshape(-1, M), N, scenario)
            evaluated += len(S)
            if np.any(np.isfinite(S)):
                found = True
                i = int(np.nanargmax(S))
                if S[i] > best[0]:
                    best = (float(S[i]), N, chunk.reshape(-1, M)[i].copy())
        if found:
            seen_feasible = True
            empty = 0
        elif seen_feasible:
            empty += 1
            if empty >= _EMPTY_RUN and n_values is None:
                break
    S_best, N, z = best
    if N is None:
        raise InfeasibleScenarioError("no grid point is feasible for any slot count")
    plan, schedule = refine_schedule(z, N, scenario)
    return OracleResult(S_best, N, z, plan, schedule, verify(plan, schedule, scenario), evaluated)

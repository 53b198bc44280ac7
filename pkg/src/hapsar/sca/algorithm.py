"""Two-phase search: sweep bound from the energy deficit, then SCA per slot count.

Phase 1 alternates the deficit subproblem with the sweep bound until the
bound stops moving. Phase 2 runs successive convex approximation for every
N = 2..N_up, keeps the best verified plan, and records a trace row per
iteration.
"""

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from ..atmosphere import harvested_power
from ..energy import propulsion_power, schedule_from_powers
from ..errors import ConstraintError, InfeasibleScenarioError
from ..platform import build_sweep_plan, positions, total_coverage
from ..sensing import min_comm_power, min_radar_power
from ..verify import verify
from .problems import ScaIterate, build_p5, build_p7
from .surrogates import KW

log = logging.getLogger(__name__)

MAX_RESTORE = 30


@dataclass
class TraceRow:
    phase: str
    N: int
    k: int
    objective: float
    xi: float
    status: str
    max_residual: float
    wall_time: float


@dataclass
class SlotCountResult:
    N: int
    status: str
    reason: str = ""
    plan: object = None
    schedule: object = None
    coverage: float = float("nan")
    iterations: int = 0
    converged: bool = False
    verification: object = None
    history: list = field(default_factory=list)


@dataclass
class OptimizeReport:
    t_tilde: float
    N_up: int
    N_star: int
    S_star: float
    results: list
    trace: list
    verification: object
    wall_time: float


def _solve(prog, scenario):
    return prog.solve(scenario.solver.backend, _settings(scenario))


def _settings(scenario):
    return {}


def _clip(z, scenario):
    return np.clip(z, scenario.platform.z_min, scenario.platform.z_max)


def initial_altitudes(scenario):
    pf = scenario.platform
    return np.full(scenario.M, 0.5 * (pf.z_min + pf.z_max))


def coverage_of(z, N, scenario):
    plan = build_sweep_plan(z, scenario.geometry(N))
    return total_coverage(plan)


def deficit_bound_factor(scenario):
    """Ledger factor used in the sweep bound: the smaller of charge and discharge factors."""
    pf = scenario.platform
    return min(pf.eta_b, pf.discharge_factor)


def sweep_upper_bound(t_tilde, scenario=None, eta=None, E_ini=None, delta_t=None, N_cap=None):
    """Largest slot count the battery can carry given a per-revolution deficit t_tilde (W).

    Scenario supplies any of eta, E_ini, delta_t, N_cap not given explicitly.
    """
    if scenario is not None:
        eta = deficit_bound_factor(scenario) if eta is None else eta
        E_ini = scenario.platform.E_ini if E_ini is None else E_ini
        delta_t = scenario.mission.delta_t if delta_t is None else delta_t
        N_cap = scenario.mission.N_cap if N_cap is None else N_cap
    if None in (eta, E_ini, delta_t, N_cap):
        raise ConstraintError("sweep bound needs eta, E_ini, delta_t and N_cap")
    if not (eta > 0 and E_ini > 0 and delta_t > 0):
        raise ConstraintError("sweep bound needs positive eta, E_ini and delta_t")
    if t_tilde <= 0:
        return int(N_cap)
    # tiny relative slack so that exact quotients are not lost to rounding
    q = E_ini / (delta_t * eta * t_tilde)
    return int(min(math.floor(q * (1 + 1e-12)), N_cap))


def phase_one(scenario, z0=None, trace=None):
    """Returns (N_up, t_tilde in W, altitudes at the last deficit iterate)."""
    z = _clip(initial_altitudes(scenario) if z0 is None else np.asarray(z0, float), scenario)
    trace = [] if trace is None else trace
    N_prev = None
    t_tilde = float("nan")
    for k in range(1, scenario.solver.max_outer + 1):
        res = _solve(build_p7(z, scenario), scenario)
        if not res.optimal:
            raise InfeasibleScenarioError(f"deficit subproblem failed with status {res.status}", trace)
        t_tilde = res.primal["t_tilde"] * KW
        z = _clip(np.array([res.primal[f"z[{m}]"] for m in range(1, scenario.M + 1)]) * 1e3, scenario)
        N = sweep_upper_bound(t_tilde, scenario)
        xi = float("inf") if N_prev is None else abs(N - N_prev) / max(N, 1)
        trace.append(TraceRow("bound", N, k, t_tilde, xi, res.status, res.max_residual, res.wall_time))
        if N_prev is not None and xi < scenario.solver.delta_1:
            break
        N_prev = N
    return N, t_tilde, z


def refine_schedule(altitudes, N, scenario, fixed=None):
    """Plan at the given altitudes with the smallest radar and comm powers meeting their margins.

    Pinned schedules in `fixed` are used as given. Propulsion, harvest and
    the energy trace come from the raw models.
    """
    fixed = fixed or {}
    geo = scenario.geometry(N)
    pf = scenario.platform
    plan = build_sweep_plan(_clip(altitudes, scenario), geo, pf.z_min, pf.z_max)
    x, y, z = positions(plan)
    V = np.repeat(plan.speeds, N)
    if "P_rad" in fixed:
        P_rad = np.broadcast_to(np.asarray(fixed["P_rad"], dtype=float).reshape(-1), z.shape).copy()
    else:
        P_rad = min_radar_power(z, V, scenario.radar, geo)
    if "P_com" in fixed:
        P_com = np.broadcast_to(np.asarray(fixed["P_com"], dtype=float).reshape(-1), z.shape).copy()
    else:
        P_com = min_comm_power(np.vstack([x, y, z]), z, scenario.radar, scenario.comm, geo)
    P_mot = propulsion_power(z, V, pf, scenario.atmosphere)
    P_har = harvested_power(z, pf.eta_h, pf.A_panel, scenario.atmosphere)
    return plan, schedule_from_powers(P_rad, P_com, P_mot, P_har, geo.delta_t, pf)


def _altitudes(primal, M):
    return np.array([primal[f"z[{m}]"] for m in range(1, M + 1)]) * 1e3


def _restore(z, N, scenario, fixed, trace):
    """Move z until the inner approximation is feasible. Returns (z or None, reason)."""
    el_prev = float("inf")
    for k in range(1, MAX_RESTORE + 1):
        prog, _ = build_p5(ScaIterate(z), N, scenario, fixed, restore=True)
        res = _solve(prog, scenario)
        if not res.optimal:
            trace.append(TraceRow("restore", N, k, float("nan"), float("nan"), res.status, float("nan"),
                                  res.wall_time))
            return None, f"restoration subproblem {res.status}"
        el = res.primal["elastic"]
        z_new = _clip(_altitudes(res.primal, scenario.M), scenario)
        step = float(np.max(np.abs(z_new - z)))
        trace.append(TraceRow("restore", N, k, el, step, res.status, res.max_residual, res.wall_time))
        z = z_new
        if el < 0:
            return z, ""
        if step < 1e-6 or el_prev - el < 1e-4:
            return None, f"no feasible point found (elastic stalled at {el:.3g})"
        el_prev = el
    return None, "restoration iteration cap reached"


def run_sca(scenario, N, z0=None, fixed=None, trace=None, fallback=None):
    """SCA for one slot count. Returns a SlotCountResult; never raises on infeasibility.

    fallback: altitudes tried as expansion point when z0 gives an infeasible
    subproblem, before falling back to restoration.
    """
    trace = [] if trace is None else trace
    z = _clip(initial_altitudes(scenario) if z0 is None else np.asarray(z0, float), scenario)
    out = SlotCountResult(N, "skipped")
    delta_2 = scenario.solver.delta_2
    starts = [z] if fallback is None else [z, _clip(np.asarray(fallback, float), scenario)]
    res = None
    for attempt in range(len(starts) + 1):
        prog, handles = build_p5(ScaIterate(z), N, scenario, fixed)
        res = _solve(prog, scenario)
        if res.optimal or attempt == len(starts):
            break
        if attempt + 1 < len(starts):
            z = starts[attempt + 1]
            continue
        z, reason = _restore(z, N, scenario, fixed, trace)
        if z is None:
            out.reason = reason
            log.info("N=%d skipped: %s", N, reason)
            return out
    if not res.optimal:
        out.reason = f"subproblem {res.status} after restoration"
        return out
    S_prev = coverage_of(z, N, scenario)
    out.history.append(S_prev)
    k = 0
    while True:
        k += 1
        z_new = _clip(handles.altitudes(res.primal), scenario)
        S_new = coverage_of(z_new, N, scenario)
        xi = abs(S_new - S_prev) / S_new
        trace.append(TraceRow("sca", N, k, S_new, xi, res.status, res.max_residual, res.wall_time))
        out.history.append(S_new)
        z, S_prev = z_new, S_new
        if xi <= delta_2:
            out.converged = True
            break
        if k >= scenario.solver.max_inner:
            break
        prog, handles = build_p5(ScaIterate(z), N, scenario, fixed)
        res = _solve(prog, scenario)
        if not res.optimal:
            trace.append(TraceRow("sca", N, k + 1, float("nan"), float("nan"), res.status, float("nan"),
                                  res.wall_time))
            break
    out.iterations = k
    plan, schedule = refine_schedule(z, N, scenario, fixed)
    report = verify(plan, schedule, scenario)
    out.plan, out.schedule, out.verification = plan, schedule, report
    out.coverage = total_coverage(plan)
    if report.feasible:
        out.status = "ok"
    else:
        out.status = "unverified"
        out.reason = "raw verifier rejected: " + ", ".join(f"{k} {v:.3g}" for k, v in report.violations().items())
    return out


def optimize(scenario, n_cap=None, fixed=None, n_values=None):
    """Full search. Returns (plan, schedule, S_star in m^2, OptimizeReport)."""
    start = time.perf_counter()
    trace = []
    if scenario.M < 1:
        raise ConstraintError("need at least one sweep")
    N_up, t_tilde, _ = phase_one(scenario, trace=trace)
    if n_cap is not None:
        N_up = min(N_up, int(n_cap))
    pinned = {np.size(v) for v in (fixed or {}).values() if np.size(v) > 1}
    if pinned:
        # a per-slot schedule fixes the slot count
        if len(pinned) > 1 or next(iter(pinned)) % scenario.M:
            raise ConstraintError(f"pinned schedules of {sorted(pinned)} slots do not fit M = {scenario.M}")
        N_pin = next(iter(pinned)) // scenario.M
        n_values = [N_pin] if n_values is None else [n for n in n_values if n == N_pin]
    candidates = list(range(2, N_up + 1)) if n_values is None else [n for n in n_values if 2 <= n <= N_up]
    results = []
    best = None
    last_z = None
    for N in candidates:
        r = run_sca(scenario, N, fixed=fixed, trace=trace, fallback=last_z)
        results.append(r)
        if r.status == "ok":
            last_z = r.plan.altitudes
        if r.status == "ok" and (best is None or r.coverage > best.coverage):
            best = r
    wall = time.perf_counter() - start
    if best is None:
        residuals = {}
        for r in results:
            if r.verification is not None:
                residuals[r.N] = r.verification.residuals
        reasons = "; ".join(f"N={r.N}: {r.reason}" for r in results) or f"bound N_up = {N_up} < 2"
        raise InfeasibleScenarioError(f"no slot count produced a feasible plan ({reasons})", trace, residuals)
    report = OptimizeReport(t_tilde, N_up, best.N, best.coverage, results, trace, best.verification, wall)
    return best.plan, best.schedule, best.coverage, report


def run_benchmark(scenario, kind, schedule, z0=None, N=None):
    """Re-solve with radar ('radar') or comm ('comm') power pinned to a supplied schedule.

    N defaults to the schedule length / M; the search starts from z0 (mid-band by default).
    """
    key = {"radar": "P_rad", "comm": "P_com"}.get(kind)
    if key is None:
        raise ConstraintError(f"benchmark kind must be 'radar' or 'comm', not {kind!r}")
    values = np.asarray(schedule, dtype=float).reshape(-1)
    if values.size % scenario.M:
        raise ConstraintError(f"pinned schedule has {values.size} slots, not a multiple of M = {scenario.M}")
    N = values.size // scenario.M if N is None else N
    trace = []
    r = run_sca(scenario, N, z0=z0, fixed={key: values}, trace=trace)
    return r, trace

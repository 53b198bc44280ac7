"""Assembly of the per-iteration convex subproblems.

build_p5: coverage maximisation for a fixed slot count N.
build_p7: minimum total per-sweep energy deficit, feeding the sweep bound.
"""

from dataclasses import dataclass, field

import numpy as np

from ..conic.program import ConvexProgram
from ..errors import ConstraintError
from .surrogates import (KM, KW, MJ, SurrogateContext, add_sweep_bounds, build_comm_constraints,
                         build_energy_constraints, build_snr_constraints, objective_minorant)

# elastic variable range used when searching for a feasible expansion point
ELASTIC_FLOOR = -0.01
# relative tightening of hard caps so that solver-tolerance errors stay on the safe side
BACKOFF = 1e-7


@dataclass
class ScaIterate:
    altitudes: np.ndarray
    start_radii: np.ndarray = None
    speeds: np.ndarray = None
    objective: float = float("nan")
    xi: float = float("inf")
    feasibility_residuals: dict = field(default_factory=dict)


@dataclass
class P5Handles:
    """Variable names needed to read a P5 solution back."""
    M: int
    N: int
    restore: bool

    def altitudes(self, primal):
        return np.array([primal[f"z[{m}]"] for m in range(1, self.M + 1)]) * KM

    def powers(self, primal, name):
        return np.array([primal[f"{name}[{n}]"] for n in range(1, self.M * self.N + 1)]) * KW

    def energy(self, primal):
        return np.array([primal[f"E[{n}]"] for n in range(1, self.M * self.N + 1)]) * MJ


def _check_fixed(fixed, MN):
    fixed = dict(fixed or {})
    for key, arr in fixed.items():
        if key not in ("P_rad", "P_com"):
            raise ConstraintError(f"only P_rad and P_com can be pinned, not {key}")
        arr = np.asarray(arr, dtype=float).reshape(-1)
        if arr.size == 1:
            # a single value pins every slot, whatever N is
            arr = np.full(MN, arr[0])
        if arr.size != MN:
            raise ConstraintError(f"pinned {key} has {arr.size} slots, expected {MN}")
        fixed[key] = arr
    return fixed


def build_p5(iterate, N, scenario, fixed=None, restore=False, n_breakpoints=None):
    """Convex inner approximation of the coverage problem around iterate.altitudes.

    fixed: optional {'P_rad': W per slot, 'P_com': W per slot} pinned schedules;
    a single value pins every slot.
    restore: minimise an elastic variable that relaxes the power caps and the
    energy floor instead of maximising coverage; used to reach a feasible
    expansion point.
    """
    if N < 2:
        raise ConstraintError("N must be at least 2")
    z_k = iterate.altitudes if isinstance(iterate, ScaIterate) else iterate
    ctx = SurrogateContext(scenario, N, z_k, n_breakpoints, BACKOFF)
    M = ctx.M
    MN = M * N
    fixed = _check_fixed(fixed, MN)
    pf, radar, comm = scenario.platform, scenario.radar, scenario.comm
    prog = ConvexProgram(f"p5_N{N}" + ("_restore" if restore else ""))

    Z = [prog.add_variable(f"z[{m}]", ctx.Zlo, ctx.Zhi) for m in range(1, M + 1)]
    inf = float("inf")
    prad_max = radar.P_rad_max * (1 - BACKOFF) / KW
    pcom_max = comm.P_com_max * (1 - BACKOFF) / KW
    e_min = (pf.E_floor + BACKOFF * pf.E_ini) / MJ
    prad_hi = inf if restore else prad_max
    pcom_hi = inf if restore else pcom_max
    P_rad, P_com, P_mot = [], [], []
    for n in range(1, MN + 1):
        if "P_rad" in fixed:
            v = fixed["P_rad"][n - 1] / KW
            P_rad.append(prog.add_variable(f"P_rad[{n}]", v, v))
        else:
            P_rad.append(prog.add_variable(f"P_rad[{n}]", 0.0, prad_hi))
    for n in range(1, MN + 1):
        if "P_com" in fixed:
            v = fixed["P_com"][n - 1] / KW
            P_com.append(prog.add_variable(f"P_com[{n}]", v, v))
        else:
            P_com.append(prog.add_variable(f"P_com[{n}]", 0.0, pcom_hi))
    for n in range(1, MN + 1):
        P_mot.append(prog.add_variable(f"P_mot[{n}]", 0.0))
    e_floor = -inf if restore else e_min
    E = [prog.add_variable(f"E[{n}]", e_floor) for n in range(1, MN + 1)]
    slack = {}
    for name in ("p", "q", "r", "t", "u", "phi", "psi"):
        slack[name] = [prog.add_variable(f"{name}[{n}]", 0.0, role="slack") for n in range(1, MN + 1)]

    aux = [add_sweep_bounds(prog, ctx, Z, m) for m in range(M)]

    if restore:
        s_el = prog.add_variable("elastic", ELASTIC_FLOOR, role="aux")
        for n in range(MN):
            if "P_rad" not in fixed:
                prog.add_le(P_rad[n], (s_el + 1.0) * prad_max, tag=f"c11r:{n + 1}")
            if "P_com" not in fixed:
                prog.add_le(P_com[n], (s_el + 1.0) * pcom_max, tag=f"c11c:{n + 1}")
            prog.add_ge(E[n] + s_el * (pf.E_ini / MJ), e_min, tag=f"c14:{n + 1}")

    ks = sorted({pf.eta_b, pf.discharge_factor})
    dt = ctx.geometry.delta_t
    for n in range(1, MN + 1):
        i = n - 1
        m = ctx.sweep_of(n)
        build_comm_constraints(prog, ctx, n, Z, P_com[i], [slack["p"][i], slack["q"][i], slack["r"][i]], aux[m])
        build_energy_constraints(prog, ctx, n, Z, P_mot[i], slack["t"][i], slack["u"][i], aux[m])
        build_snr_constraints(prog, ctx, n, Z, P_rad[i], slack["phi"][i], slack["psi"][i])
        if (n - 1) % N and "P_rad" not in fixed:
            prog.add_eq(P_rad[i] - P_rad[i - 1], tag=f"c10:{n}")
        if n == 1:
            prog.add_eq(E[0], pf.E_ini / MJ, tag="c13")
        else:
            deficit = aux[m]["H"] - P_mot[i] - P_rad[i] - P_com[i]
            # the ledger increment k P_re is concave in P_re when the charge factor is the
            # smaller one, and min over both factors bounds it from below in every case
            for k in ks:
                prog.add_le(E[i] - E[i - 1], deficit * (k * dt * KW / MJ), tag=f"c9e:{n}:{k:g}")

    if restore:
        prog.set_objective(s_el, "min")
    else:
        prog.set_objective(objective_minorant(prog, ctx, Z), "max")
    return prog, P5Handles(M, N, restore)


def build_p7(iterate, scenario, n_breakpoints=None):
    """Minimise t~ >= sum over sweeps of (propulsion - harvest) in kW."""
    z_k = iterate.altitudes if isinstance(iterate, ScaIterate) else iterate
    ctx = SurrogateContext(scenario, 2, z_k, n_breakpoints, BACKOFF)
    prog = ConvexProgram("p7")
    M = ctx.M
    Z = [prog.add_variable(f"z[{m}]", ctx.Zlo, ctx.Zhi) for m in range(1, M + 1)]
    total = prog.add_variable("t_tilde")
    deficit = 0.0
    for m in range(M):
        aux = add_sweep_bounds(prog, ctx, Z, m, tag="p7s")
        P_mot = prog.add_variable(f"P_mot[{m + 1}]", 0.0)
        t = prog.add_variable(f"t[{m + 1}]", 0.0, role="slack")
        u = prog.add_variable(f"u[{m + 1}]", 0.0, role="slack")
        # reuse the per-slot propulsion surrogate on the first slot of sweep m
        build_energy_constraints(prog, ctx, m * ctx.N + 1, Z, P_mot, t, u, aux)
        deficit = deficit + P_mot - aux["H"]
    prog.add_ge(total, deficit, tag="c17")
    prog.set_objective(total, "min")
    return prog

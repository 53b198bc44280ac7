"""Convex surrogate rows built around an expansion point.

Inside the subproblems altitudes and radii are in km, powers in kW and
energy in MJ, which keeps every row within a few orders of magnitude of
one. The trajectory enters only through per-sweep altitudes Z; start radii
are the affine map R = T Z and speeds are functions of R.

Every surrogate below is an inner approximation: a point satisfying the
rows satisfies the raw constraint (up to solver tolerance).
"""

import math

import numpy as np

from ..atmosphere import air_density_at, density_slope, harvested_power, pressure_at
from ..conic.program import Affine, dot
from ..errors import ConstraintError
from ..platform import azimuths, coverage_form, start_radius_matrix
from ..sensing import rate_coefficients, snr_constant
from .dc import ScalarFn, breakpoints, chords, square_tangent

KM = 1e3
KW = 1e3
MJ = 1e6
# expansion-point floor for the squared-offset terms (km^2); keeps balancing weights finite
_OFFSET_FLOOR = 1e-12
# relative tightening of the SNR row; a pinned radar schedule at its exact minimum makes the row
# active, and interior-point residuals up to ~1e-6 would otherwise show up in the raw check
SNR_BACKOFF = 1e-5


def _lin_square(g, x0, x):
    """Tangent of g^2 at x0 as an affine expression in x."""
    v0, s0 = square_tangent(g, x0)
    return Affine.lift(x) * float(s0) + float(v0 - s0 * x0)


class SurrogateContext:
    """Scaled model functions and frozen quantities at one expansion point z_k (m)."""

    def __init__(self, scenario, N, z_k, n_breakpoints=None, backoff=1e-7):
        self.scenario = scenario
        self.N = int(N)
        self.geometry = scenario.geometry(self.N)
        self.M = self.geometry.M
        pf = scenario.platform
        z_k = np.asarray(z_k, dtype=float).reshape(-1)
        if z_k.size != self.M:
            raise ConstraintError(f"expansion point has {z_k.size} altitudes, expected {self.M}")
        tol = 1e-9 * pf.z_max
        if np.any(z_k < pf.z_min - tol) or np.any(z_k > pf.z_max + tol):
            raise ConstraintError("expansion point outside the altitude band")
        self.z_k = np.clip(z_k, pf.z_min, pf.z_max)
        self.Zk = self.z_k / KM
        self.nbp = n_breakpoints or scenario.solver.breakpoints
        self.T = start_radius_matrix(self.geometry)
        self.Rk = self.T @ self.Zk
        self.Zlo, self.Zhi = pf.z_min / KM, pf.z_max / KM
        self.Rlo = self.T.sum(axis=1) * self.Zlo
        self.Rhi = self.T.sum(axis=1) * self.Zhi
        turn = self.geometry.turn_factor
        self.turn = turn
        self.Rcap = pf.V_max ** 2 / turn / KM * (1 - backoff)
        self.backoff = backoff
        self.Vk = np.sqrt(turn * KM * self.Rk)
        self.phi = azimuths(self.N, self.M)
        self.cache = {}
        self._build_functions()

    # -- scaled functions ----------------------------------------------------

    def _build_functions(self):
        sc = self.scenario
        atm, pf, radar, comm = sc.atmosphere, sc.platform, sc.radar, sc.comm
        a, b = rate_coefficients(radar, comm, self.geometry, comm.rate_margin)
        ak = a * KM
        ln2 = math.log(2)
        self.g1 = ScalarFn(lambda Z: b * np.exp2(ak * np.asarray(Z, dtype=float)) - 1.0,
                           lambda Z: b * ak * ln2 * np.exp2(ak * np.asarray(Z, dtype=float)), "g1")
        self.g5 = ScalarFn(lambda Z: np.asarray(air_density_at(np.asarray(Z) * KM, atm)),
                           lambda Z: KM * np.asarray(density_slope(np.asarray(Z) * KM, atm)), "g5")
        self.g7 = ScalarFn(lambda Z: 1.0 / self.g5(Z),
                           lambda Z: -self.g5.deriv(Z) / self.g5(Z) ** 2, "g7")
        turn = self.turn
        k6 = pf.S_wing * pf.C_d0 / (2 * pf.drive_efficiency) / KW
        k8 = 2 * pf.epsilon * pf.W ** 2 / (pf.drive_efficiency * pf.S_wing) / KW
        # V = sqrt(turn * 1e3 R): g6 = k6 V^3, g8 = k8 / V as functions of R in km
        c3 = (turn * KM) ** 1.5
        c1 = (turn * KM) ** 0.5
        self.g6 = ScalarFn(lambda R: k6 * c3 * np.asarray(R, dtype=float) ** 1.5,
                           lambda R: 1.5 * k6 * c3 * np.asarray(R, dtype=float) ** 0.5, "g6")
        self.g8 = ScalarFn(lambda R: k8 / (c1 * np.asarray(R, dtype=float) ** 0.5),
                           lambda R: -0.5 * k8 / (c1 * np.asarray(R, dtype=float) ** 1.5), "g8")
        self.harvest = lambda Z: np.asarray(harvested_power(np.asarray(Z) * KM, pf.eta_h, pf.A_panel, atm)) / KW
        # smallest start radius (km) whose turn speed reaches the stall speed at altitude Z
        k_stall = 2 * pf.W / (pf.S_wing * pf.C_L_max) / turn / KM * (1 + self.backoff)
        self.stall_radius = lambda Z: k_stall / np.asarray(pressure_at(np.asarray(Z) * KM, atm))
        self.snr_coef = (snr_constant(radar, self.geometry) / (1 + radar.snr_margin) * (1 - SNR_BACKOFF)
                         * KW / KM ** 3)
        self.link_coef = comm.gain_to_noise * KW / KM ** 2
        self.bs = np.asarray(comm.bs_position, dtype=float) / KM

    # -- helpers -------------------------------------------------------------

    def sweep_of(self, n):
        return (n - 1) // self.N

    def radius(self, Z, m):
        """Start radius of sweep m (0-based) as an affine expression of the altitude variables."""
        return dot(self.T[m], Z)

    def r_range(self, m):
        lo = min(self.Rlo[m], self.Rk[m])
        hi = max(min(self.Rhi[m], self.Rcap), self.Rk[m])
        return lo, hi

    def z_points(self, m):
        return breakpoints(self.Zlo, self.Zhi, self.nbp, extra=(self.Zk[m],))

    def r_points(self, m):
        lo, hi = self.r_range(m)
        return breakpoints(lo, hi, self.nbp, extra=(self.Rk[m],))

    def offsets(self, n, Z):
        """Base-station offsets (x, y, z) of slot n in km: affine in Z, plus values at the expansion point."""
        m = self.sweep_of(n)
        phi = self.phi[n - 1]
        R = self.radius(Z, m)
        exprs = [R * math.cos(phi) - self.bs[0], R * math.sin(phi) - self.bs[1], Z[m] - self.bs[2]]
        Rk = self.Rk[m]
        vals = [Rk * math.cos(phi) - self.bs[0], Rk * math.sin(phi) - self.bs[1], self.Zk[m] - self.bs[2]]
        return exprs, vals


def _is_null(expr, bound):
    """True when |expr| stays below 1e-9 km for every altitude in the box."""
    size = abs(expr.const) + sum(abs(v) for v in expr.terms.values()) * bound
    return size < 1e-9


def add_upper_chords(prog, ctx, gamma, fn, arg, pts, tag, scale=1.0):
    """gamma >= chords of convex fn over pts, applied to the affine argument arg.

    Rows are divided by `scale` so that solver tolerances act relative to the
    size of fn rather than in absolute units.
    """
    if len(pts) < 2:
        # degenerate box: the argument is pinned to the single breakpoint
        prog.add_ge(gamma / scale, float(fn(pts[0])) / scale, tag=f"{tag}:0")
        return
    slope, icpt = chords(fn, pts)
    for j, (s, c) in enumerate(zip(slope, icpt)):
        prog.add_ge(gamma / scale, (Affine.lift(arg) * float(s) + float(c)) / scale, tag=f"{tag}:{j}")


def add_lower_chords(prog, ctx, h, fn, arg, pts, tag, scale=1.0):
    """h <= chords of concave fn over pts."""
    if len(pts) < 2:
        prog.add_le(h / scale, float(fn(pts[0])) / scale, tag=f"{tag}:0")
        return
    slope, icpt = chords(fn, pts)
    for j, (s, c) in enumerate(zip(slope, icpt)):
        prog.add_le(h / scale, (Affine.lift(arg) * float(s) + float(c)) / scale, tag=f"{tag}:{j}")


def _scaled_var(prog, name, size, lo=None):
    """Variable stored in units of `size`; returns the expression in natural units."""
    v = prog.add_variable(name, -float("inf") if lo is None else lo, role="aux")
    return v * size


def add_sweep_bounds(prog, ctx, Z, m, tag="sweep"):
    """Per-sweep auxiliaries: secant bounds of g1, g5..g8, harvest, and the speed window."""
    R = ctx.radius(Z, m)
    zp = ctx.z_points(m)
    rp = ctx.r_points(m)
    out = {}
    for name, fn, arg, pts, x0 in (("g1", ctx.g1, Z[m], zp, ctx.Zk[m]), ("g5", ctx.g5, Z[m], zp, ctx.Zk[m]),
                                   ("g7", ctx.g7, Z[m], zp, ctx.Zk[m]), ("g6", ctx.g6, R, rp, ctx.Rk[m]),
                                   ("g8", ctx.g8, R, rp, ctx.Rk[m])):
        size = float(fn(x0))
        gv = _scaled_var(prog, f"{name}_ub[{m + 1}]", size, 0.0)
        add_upper_chords(prog, ctx, gv, fn, arg, pts, f"{tag}{m + 1}:{name}", size)
        out[name] = gv
    size = max(float(ctx.harvest(ctx.Zk[m])), 1e-9)
    H = _scaled_var(prog, f"P_har[{m + 1}]", size)
    add_lower_chords(prog, ctx, H, ctx.harvest, Z[m], zp, f"{tag}{m + 1}:har", size)
    out["H"] = H
    # speed window: stall radius is convex in Z (upper chords), V_max is a radius cap
    rk = float(ctx.Rk[m])
    add_upper_chords(prog, ctx, R, ctx.stall_radius, Z[m], zp, f"{tag}{m + 1}:vmin", rk)
    prog.add_le(R / rk, float(ctx.Rcap) / rk, tag=f"{tag}{m + 1}:vmax")
    return out


def build_comm_constraints(prog, ctx, n, Z, P_com, slacks, aux):
    """Link-budget surrogate for slot n.

    The three products g1 * offset_i^2 are split with per-term balancing
    weights lam_i; slack e_i bounds lam_i g1 + offset_i^2 / lam_i through a
    rotated cone and the main row bounds the sum of squared slacks by the
    power term plus the tangents of the subtracted squares.
    """
    exprs, vals = ctx.offsets(n, Z)
    g1k = float(ctx.g1(ctx.Zk[ctx.sweep_of(n)]))
    m = ctx.sweep_of(n)
    gamma1 = aux["g1"]
    lin_g1 = _lin_square(ctx.g1, ctx.Zk[m], Z[m])
    rhs = P_com * (2 * ctx.link_coef)
    used = []
    handles = []
    scale = 0.0
    for i, (e, ex, vk) in enumerate(zip(slacks, exprs, vals)):
        if _is_null(ex, ctx.Zhi):
            continue
        v2 = max(vk * vk, _OFFSET_FLOOR)
        lam2 = v2 / g1k
        lam = math.sqrt(lam2)
        # rows are divided by their size at the expansion point (cones are homogeneous)
        handles.append(prog.add_rotated_cone((e - gamma1 * lam) * (lam / v2), 0.5, [ex / math.sqrt(v2)],
                                             tag=f"c8:{n}:{i}"))
        scale += 4 * v2 * g1k
        # tangent of offset^4 at the expansion point
        tang4 = ex * (4 * vk ** 3) + (vk ** 4 - 4 * vk ** 4)
        rhs = rhs + lin_g1 * lam2 + tang4 / lam2
        used.append(e)
    if used:
        handles.append(prog.add_rotated_cone(rhs / scale, 0.5, [e / math.sqrt(scale) for e in used],
                                             tag=f"c8:{n}"))
    return handles


def build_energy_constraints(prog, ctx, n, Z, P_mot, t, u, aux):
    """Propulsion surrogate for slot n: P_mot bounds g5 g6 + g7 g8 from above."""
    m = ctx.sweep_of(n)
    key = ("energy", m)
    if key not in ctx.cache:
        R = ctx.radius(Z, m)
        zk, rk = ctx.Zk[m], ctx.Rk[m]
        l4 = math.sqrt(float(ctx.g6(rk)) / float(ctx.g5(zk)))
        l5 = math.sqrt(float(ctx.g8(rk)) / float(ctx.g7(zk)))
        lin = (_lin_square(ctx.g5, zk, Z[m]) * l4 ** 2 + _lin_square(ctx.g6, rk, R) / l4 ** 2
               + _lin_square(ctx.g7, zk, Z[m]) * l5 ** 2 + _lin_square(ctx.g8, rk, R) / l5 ** 2)
        # t^2 + u^2 at the expansion point
        s = 4 * float(ctx.g5(zk) * ctx.g6(rk) + ctx.g7(zk) * ctx.g8(rk))
        ctx.cache[key] = (l4, l5, lin, s)
    l4, l5, lin, s = ctx.cache[key]
    h = [prog.add_ge(t, aux["g5"] * l4 + aux["g6"] / l4, tag=f"c9a:{n}"),
         prog.add_ge(u, aux["g7"] * l5 + aux["g8"] / l5, tag=f"c9b:{n}")]
    h.append(prog.add_rotated_cone((P_mot + lin * 0.5) / s, 1.0, [t / math.sqrt(s), u / math.sqrt(s)],
                                   tag=f"c9:{n}"))
    return h


def build_snr_constraints(prog, ctx, n, Z, P_rad, phi, psi):
    """Imaging-SNR surrogate for slot n in units of (10 km)^2 and (10 km)^3.

    phi >= z^2 and psi >= z^3 through two 2x2 PSD rows, then
    P_rad con >= psi V with V replaced by its tangent (an over-estimate, V
    being concave in R) and the bilinear psi V split around the expansion
    point with a balancing weight.
    """
    m = ctx.sweep_of(n)
    z10 = Z[m] / 10.0
    h = list(prog.lower_psd2(phi, z10, 1.0, tag=f"c12a:{n}"))
    h += list(prog.lower_psd2(psi, phi, z10, tag=f"c12b:{n}"))
    R = ctx.radius(Z, m)
    rk, vk = ctx.Rk[m], ctx.Vk[m]
    V_lin = (R - rk) * (vk / (2 * rk)) + vk
    psik = (ctx.Zk[m] / 10.0) ** 3
    a2 = vk / psik
    a = math.sqrt(a2)
    coef = ctx.snr_coef / 1e3     # psi counted in (10 km)^3
    # psi V = 1/2 (a psi + V/a)^2 - 1/2 (a^2 psi^2 + V^2/a^2); the subtracted squares enter through tangents
    lhs = P_rad * coef + ((psi * (2 * psik) - psik ** 2) * a2 + (V_lin * (2 * vk) - vk ** 2) / a2) * 0.5
    s = psik * vk
    h.append(prog.add_rotated_cone(lhs / s, 1.0, [(psi * a + V_lin / a) / math.sqrt(s)], tag=f"c12c:{n}"))
    return h


def objective_minorant(prog, ctx, Z):
    """Lower bound of total coverage (km^2), tight at the expansion point.

    The quadratic form is split into Q+ - Q-: the convex part is replaced by
    its tangent and -z^T Q- z is kept exactly through one rotated cone.
    """
    M, N = ctx.M, ctx.N
    Q = coverage_form(M)
    w_eig, V = np.linalg.eigh(Q)
    pos = w_eig > 0
    Qp = (V[:, pos] * w_eig[pos]) @ V[:, pos].T
    scale = ctx.geometry.sweep_angle * (N - 1) * ctx.geometry.kappa ** 2
    g = 2 * Qp @ ctx.Zk
    expr = dot(g, Z) - float(ctx.Zk @ Qp @ ctx.Zk)
    neg = w_eig < -1e-12
    if np.any(neg):
        L = V[:, neg] * np.sqrt(-w_eig[neg])
        w = prog.add_variable("qneg", 0.0, role="aux")
        prog.add_rotated_cone(w, 0.5, [dot(L[:, j], Z) for j in range(L.shape[1])], tag="obj:qneg")
        expr = expr - w
    return expr * scale

"""Circular-sweep trajectory geometry.

Slots are numbered 1..MN as in the mission timeline. Sweep m covers slots
(m-1)N+1 .. mN. The first slot of a sweep belongs to set A, the last to
set B and the rest to set C.
"""

import math
from dataclasses import dataclass

import numpy as np

from .atmosphere import DEFAULT_ATMOSPHERE, pressure_at
from .errors import ConfigError, ConstraintError, SlotIndexError


@dataclass(frozen=True)
class MissionGeometry:
    M: int
    N: int
    delta_t: float
    beta: float
    alpha: float
    zeta: float
    g: float = 9.8

    def __post_init__(self):
        if int(self.M) != self.M or self.M < 1:
            raise ConfigError(f"sweep count M must be an integer >= 1, got {self.M}")
        if int(self.N) != self.N or self.N < 2:
            raise ConfigError(f"slot count N must be an integer >= 2, got {self.N}")
        if not self.delta_t > 0:
            raise ConfigError(f"slot duration must be positive, got {self.delta_t}")
        if not self.alpha > 0:
            raise ConfigError(f"beam width must be positive, got {self.alpha}")
        if self.alpha_2 <= 0:
            raise ConfigError("beam width too large: alpha >= 2*beta puts the near edge behind nadir")
        if self.alpha_1 >= math.pi / 2:
            raise ConfigError("beta + alpha/2 must stay below 90 degrees")
        if not 0 < self.zeta < math.pi / 2:
            raise ConfigError(f"banking angle must lie in (0, 90) degrees, got {math.degrees(self.zeta)}")
        if not self.g > 0:
            raise ConfigError("gravitational acceleration must be positive")

    @property
    def alpha_1(self):
        return self.beta + self.alpha / 2

    @property
    def alpha_2(self):
        return self.beta - self.alpha / 2

    @property
    def omega(self):
        return 2 * math.pi / (self.N * self.delta_t)

    @property
    def sweep_angle(self):
        """omega * delta_t = 2 pi / N."""
        return 2 * math.pi / self.N

    @property
    def kappa(self):
        """Half-swath per metre of altitude."""
        return 0.5 * (math.tan(self.alpha_1) - math.tan(self.alpha_2))

    @property
    def turn_factor(self):
        """g tan(zeta), so that V^2 = R * turn_factor."""
        return self.g * math.tan(self.zeta)

    def with_slots(self, N):
        return MissionGeometry(self.M, int(N), self.delta_t, self.beta, self.alpha, self.zeta, self.g)


@dataclass(frozen=True)
class SweepPlan:
    altitudes: np.ndarray
    start_radii: np.ndarray
    speeds: np.ndarray
    geometry: MissionGeometry

    @property
    def M(self):
        return self.geometry.M

    @property
    def N(self):
        return self.geometry.N


def build_slot_sets(N, M):
    if int(N) != N or N < 2:
        raise ConfigError(f"N must be an integer >= 2, got {N}")
    if int(M) != M or M < 1:
        raise ConfigError(f"M must be an integer >= 1, got {M}")
    N, M = int(N), int(M)
    set_a = [m * N + 1 for m in range(M)]
    set_b = [(m + 1) * N for m in range(M)]
    edges = set(set_a) | set(set_b)
    set_c = [n for n in range(1, M * N + 1) if n not in edges]
    return set_a, set_b, set_c


def sweep_of(n, N):
    return (int(n) - 1) // int(N) + 1


def _check_slot(n, N, M):
    if int(n) != n or n < 1 or (M is not None and n > M * N):
        limit = "MN" if M is None else str(M * N)
        raise SlotIndexError(f"slot index {n} outside 1..{limit}")


def azimuth(n, N, M=None):
    _check_slot(n, N, M)
    if (n - 1) % N == 0:
        return 2 * math.pi * (n - 1) / N
    return 2 * math.pi * n / N


def azimuths(N, M):
    """Azimuth of every slot, shape (M*N,)."""
    n = np.arange(1, M * N + 1)
    start = (n - 1) % N == 0
    return np.where(start, 2 * np.pi * (n - 1) / N, 2 * np.pi * n / N)


def half_swath(z, geometry):
    return geometry.kappa * np.asarray(z, dtype=float) if np.ndim(z) else geometry.kappa * float(z)


def start_radius_matrix(geometry):
    """Matrix T with start_radii = T @ altitudes.

    The first sweep starts at z1 tan(beta); each later sweep moves out by the
    full swath 2r plus (z_m - z_{m-1}) tan(alpha_2).
    """
    M = geometry.M
    tb = math.tan(geometry.beta)
    ta = math.tan(geometry.alpha_2)
    k2 = 2 * geometry.kappa
    T = np.zeros((M, M))
    T[0, 0] = tb
    for m in range(1, M):
        T[m] = T[m - 1]
        T[m, m] += k2 + ta
        T[m, m - 1] -= ta
    return T


def start_radii(altitudes, geometry):
    z = np.asarray(altitudes, dtype=float)
    R = np.empty_like(z)
    R[0] = z[0] * math.tan(geometry.beta)
    for m in range(1, len(z)):
        R[m] = R[m - 1] + 2 * half_swath(z[m], geometry) + (z[m] - z[m - 1]) * math.tan(geometry.alpha_2)
    return R


def turn_speed(R, geometry):
    return np.sqrt(np.asarray(R, dtype=float) * geometry.turn_factor)


def build_sweep_plan(altitudes, geometry, z_min=None, z_max=None):
    z = np.array(altitudes, dtype=float).reshape(-1)
    if z.size != geometry.M:
        raise ConstraintError(f"expected {geometry.M} altitudes, got {z.size}")
    if np.any(z <= 0):
        raise ConstraintError("altitudes must be positive")
    if z_min is not None and np.any(z < z_min * (1 - 1e-12)):
        raise ConstraintError(f"altitude {z.min():.6g} m below z_min = {z_min:.6g} m")
    if z_max is not None and np.any(z > z_max * (1 + 1e-12)):
        raise ConstraintError(f"altitude {z.max():.6g} m above z_max = {z_max:.6g} m")
    R = start_radii(z, geometry)
    return SweepPlan(z, R, turn_speed(R, geometry), geometry)


def footprint_overlaps(plan):
    """Sweeps that start lower than the previous one (C2 then overlaps footprints)."""
    return [m + 1 for m in range(1, plan.M) if plan.altitudes[m] < plan.altitudes[m - 1]]


def position(n, plan):
    _check_slot(n, plan.N, plan.M)
    m = sweep_of(n, plan.N) - 1
    phi = azimuth(n, plan.N)
    R = plan.start_radii[m]
    return (R * math.cos(phi), R * math.sin(phi), float(plan.altitudes[m]))


def positions(plan):
    """Arrays x, y, z over all MN slots."""
    N, M = plan.N, plan.M
    phi = azimuths(N, M)
    R = np.repeat(plan.start_radii, N)
    return R * np.cos(phi), R * np.sin(phi), np.repeat(plan.altitudes, N)


def inner_radius(n, plan):
    _check_slot(n, plan.N, plan.M)
    s = sweep_of(n, plan.N)
    if s < 2:
        raise SlotIndexError(f"slot {n} lies in the first sweep, which has no inner radius")
    r = half_swath(plan.altitudes, plan.geometry)
    # r(n - N) is the previous sweep, r(n - mN) for m >= 2 the ones before it
    return float(r[s - 2] + 2 * np.sum(r[: s - 2]))


def coverage_increment(n, plan):
    _check_slot(n, plan.N, plan.M)
    if (n - 1) % plan.N == 0:
        raise SlotIndexError(f"slot {n} starts a sweep and is excluded from the coverage sum")
    s = sweep_of(n, plan.N)
    r = float(half_swath(plan.altitudes[s - 1], plan.geometry))
    wd = plan.geometry.sweep_angle
    if s == 1:
        return wd * r * r
    rt = inner_radius(n, plan)
    return 2 * (r * r + r * rt) * wd


def coverage_increments(plan):
    """Per-slot coverage, zero at sweep-start slots."""
    out = np.zeros(plan.M * plan.N)
    for n in range(1, plan.M * plan.N + 1):
        if (n - 1) % plan.N:
            out[n - 1] = coverage_increment(n, plan)
    return out


def coverage_form(M):
    """Symmetric Q with sum over sweeps of per-slot coverage = (2pi/N) (N-1) r^T Q r."""
    Q = np.zeros((M, M))
    Q[0, 0] = 1.0
    for s in range(1, M):
        Q[s, s] += 2.0
        # 2 r_s rt_s with rt_s = r_{s-1} + 2 sum_{j<s-1} r_j
        Q[s, s - 1] += 1.0
        Q[s - 1, s] += 1.0
        for j in range(s - 1):
            Q[s, j] += 2.0
            Q[j, s] += 2.0
    return Q


def total_coverage(plan):
    r = half_swath(plan.altitudes, plan.geometry)
    r = np.atleast_1d(r)
    factor = plan.geometry.sweep_angle * (plan.N - 1)
    return float(factor * r @ coverage_form(plan.M) @ r)


def stall_speed(z, W, S_wing, C_L_max, atm=DEFAULT_ATMOSPHERE):
    """Stall speed with the static pressure in the denominator, as printed in the model."""
    if W <= 0 or S_wing <= 0 or C_L_max <= 0:
        raise ConfigError("weight, wing area and C_L_max must be positive")
    p = np.asarray(pressure_at(z, atm))
    v = np.sqrt(2 * W / (p * S_wing * C_L_max))
    return float(v) if np.ndim(v) == 0 else v

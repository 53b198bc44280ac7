"""Difference-of-convex pieces: scalar convex functions, product splits and tangents.

A product h = g_a * g_b of two nonnegative convex functions is written as
    h = 1/2 (c_a g_a + c_b g_b)^2 - 1/2 ((c_a g_a)^2 + (c_b g_b)^2),  c_a c_b = 1.
The paper-style split uses c_a = c_b = 1. Picking c_a / c_b = sqrt(g_b / g_a)
at the expansion point balances the two squares, which keeps the subtracted
tangents from cancelling most of the leading term when g_a and g_b differ
by many orders of magnitude.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from ..atmosphere import DEFAULT_ATMOSPHERE, air_density_at, density_slope
from ..sensing import rate_coefficients


@dataclass(frozen=True)
class ScalarFn:
    """A scalar function of one variable with its derivative (both vectorised)."""
    f: object
    df: object
    name: str = "g"

    def __call__(self, x):
        return self.f(x)

    def deriv(self, x):
        return self.df(x)


def square_tangent(g, x0):
    """(g(x0)^2, d/dx g^2 at x0)."""
    v = g(x0)
    return v * v, 2 * v * g.deriv(x0)


def linearize_square(g, x0, x):
    """First-order Taylor expansion of g^2 around x0, evaluated at x."""
    v0, s0 = square_tangent(g, x0)
    return v0 + s0 * (np.asarray(x, dtype=float) - x0)


@dataclass(frozen=True)
class DcPair:
    name: str
    g_a: ScalarFn
    g_b: ScalarFn
    c_a: float = 1.0
    c_b: float = 1.0
    expansion_point: tuple = None

    def product(self, xa, xb):
        return self.c_a * self.c_b * self.g_a(xa) * self.g_b(xb)

    def split(self, xa, xb):
        """(convex square, subtracted squares) so that h = first - second."""
        a = self.c_a * self.g_a(xa)
        b = self.c_b * self.g_b(xb)
        return 0.5 * (a + b) ** 2, 0.5 * (a * a + b * b)

    def decomposed(self, xa, xb):
        first, second = self.split(xa, xb)
        return first - second

    def balanced(self, xa_k, xb_k, out_scale=1.0, floor=1e-300):
        """Rescaled copy with c_a c_b = 1/out_scale and equal terms at the expansion point."""
        ga = max(abs(float(self.g_a(xa_k))), floor)
        gb = max(abs(float(self.g_b(xb_k))), floor)
        c_a = math.sqrt(gb / (ga * out_scale))
        c_b = 1.0 / (out_scale * c_a)
        return replace(self, c_a=c_a, c_b=c_b, expansion_point=(xa_k, xb_k))

    def surrogate(self, xa, xb):
        """Upper bound of h: the subtracted squares replaced by their tangents at the expansion point."""
        xa_k, xb_k = self.expansion_point
        first, _ = self.split(xa, xb)
        ga = ScalarFn(lambda t: self.c_a * self.g_a(t), lambda t: self.c_a * self.g_a.deriv(t))
        gb = ScalarFn(lambda t: self.c_b * self.g_b(t), lambda t: self.c_b * self.g_b.deriv(t))
        return first - 0.5 * (linearize_square(ga, xa_k, xa) + linearize_square(gb, xb_k, xb))


def dc_identity_check(pair, probe):
    """Relative residual of the split against the product at probe = (xa, xb)."""
    xa, xb = probe
    h = pair.product(xa, xb)
    d = pair.decomposed(xa, xb)
    first, _ = pair.split(xa, xb)
    scale = max(abs(h), abs(first) * 1e-16, 1e-300)
    return abs(h - d) / scale


# -- the eight convex building blocks ---------------------------------------

def comm_functions(radar, comm, geometry, margin=0.0):
    """g1(z) = b 2^(a z) - 1 and the three squared offsets to the base station."""
    a, b = rate_coefficients(radar, comm, geometry, margin)
    ln2 = math.log(2)
    xs, ys, zs = comm.bs_position
    g1 = ScalarFn(lambda z: b * np.exp2(a * np.asarray(z, dtype=float)) - 1.0,
                  lambda z: b * a * ln2 * np.exp2(a * np.asarray(z, dtype=float)), "g1")
    g2 = ScalarFn(lambda x: (np.asarray(x, dtype=float) - xs) ** 2,
                  lambda x: 2 * (np.asarray(x, dtype=float) - xs), "g2")
    g3 = ScalarFn(lambda y: (np.asarray(y, dtype=float) - ys) ** 2,
                  lambda y: 2 * (np.asarray(y, dtype=float) - ys), "g3")
    g4 = ScalarFn(lambda z: (np.asarray(z, dtype=float) - zs) ** 2,
                  lambda z: 2 * (np.asarray(z, dtype=float) - zs), "g4")
    return {"g1": g1, "g2": g2, "g3": g3, "g4": g4}


def propulsion_functions(platform, atm=DEFAULT_ATMOSPHERE):
    """g5 = rho(z), g6 ~ V^3, g7 = 1/rho(z), g8 ~ 1/V (drive efficiency folded into g6, g8)."""
    k6 = platform.S_wing * platform.C_d0 / (2 * platform.drive_efficiency)
    k8 = 2 * platform.epsilon * platform.W ** 2 / (platform.drive_efficiency * platform.S_wing)

    def rho(z):
        return np.asarray(air_density_at(z, atm))

    def drho(z):
        return np.asarray(density_slope(z, atm))

    g5 = ScalarFn(rho, drho, "g5")
    g6 = ScalarFn(lambda V: k6 * np.asarray(V, dtype=float) ** 3,
                  lambda V: 3 * k6 * np.asarray(V, dtype=float) ** 2, "g6")
    g7 = ScalarFn(lambda z: 1.0 / rho(z), lambda z: -drho(z) / rho(z) ** 2, "g7")
    g8 = ScalarFn(lambda V: k8 / np.asarray(V, dtype=float),
                  lambda V: -k8 / np.asarray(V, dtype=float) ** 2, "g8")
    return {"g5": g5, "g6": g6, "g7": g7, "g8": g8}


def comm_pairs(radar, comm, geometry, margin=0.0):
    g = comm_functions(radar, comm, geometry, margin)
    return {
        "h1": DcPair("h1", g["g1"], g["g2"]),   # args (z, x)
        "h2": DcPair("h2", g["g1"], g["g3"]),   # args (z, y)
        "h3": DcPair("h3", g["g1"], g["g4"]),   # args (z, z)
    }


def propulsion_pairs(platform, atm=DEFAULT_ATMOSPHERE):
    g = propulsion_functions(platform, atm)
    return {
        "h4": DcPair("h4", g["g5"], g["g6"]),   # args (z, V)
        "h5": DcPair("h5", g["g7"], g["g8"]),   # args (z, V)
    }


def comm_dc_eval(x, y, z, comm, radar, geometry, margin=0.0):
    """(h1, h2, h3); their sum below (rho0/sigma^2) P_com is the link constraint."""
    p = comm_pairs(radar, comm, geometry, margin)
    return p["h1"].product(z, x), p["h2"].product(z, y), p["h3"].product(z, z)


def propulsion_dc_eval(z, V, platform, atm=DEFAULT_ATMOSPHERE):
    """(h4, h5): parasitic and induced propulsion power."""
    p = propulsion_pairs(platform, atm)
    return p["h4"].product(z, V), p["h5"].product(z, V)


# -- piecewise-linear bounds ------------------------------------------------

def breakpoints(lo, hi, count, extra=()):
    pts = np.linspace(lo, hi, max(int(count), 2))
    pts = np.concatenate([pts, [e for e in extra if lo <= e <= hi]])
    pts = np.unique(pts)
    # merge points closer than a relative 1e-9 to avoid ill-conditioned chords
    keep = [pts[0]]
    for p in pts[1:]:
        if p - keep[-1] > 1e-9 * max(1.0, abs(p)):
            keep.append(p)
    return np.array(keep)


def chords(f, pts):
    """Slopes and intercepts of the chords between consecutive breakpoints.

    For convex f the max of these lines is the interpolant, an upper bound on
    the breakpoint range; for concave f their min is a lower bound.
    """
    pts = np.asarray(pts, dtype=float)
    vals = np.asarray(f(pts), dtype=float)
    slope = np.diff(vals) / np.diff(pts)
    icpt = vals[:-1] - slope * pts[:-1]
    return slope, icpt

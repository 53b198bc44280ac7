"""Vectorised algebra on products of a nonnegative orthant and second-order cones.

A vector lives in R^l x Q^{q_1} x Q^{q_2} x ...; second-order cones of equal
dimension are processed together through (k, d) index arrays.
"""

import numpy as np


class ConeProduct:

    def __init__(self, l, q):
        self.l = int(l)
        self.q = [int(d) for d in q]
        if any(d < 2 for d in self.q):
            raise ValueError("second-order cones need dimension >= 2")
        self.dim = self.l + sum(self.q)
        self.degree = self.l + len(self.q)
        starts = {}
        off = self.l
        for d in self.q:
            starts.setdefault(d, []).append(off)
            off += d
        self.groups = [(d, np.asarray(s)[:, None] + np.arange(d)[None, :]) for d, s in sorted(starts.items())]

    def identity(self):
        e = np.zeros(self.dim)
        e[: self.l] = 1.0
        for d, idx in self.groups:
            e[idx[:, 0]] = 1.0
        return e

    def prod(self, u, v):
        """Jordan product u o v."""
        out = np.empty(self.dim)
        l = self.l
        out[:l] = u[:l] * v[:l]
        for d, idx in self.groups:
            U, V = u[idx], v[idx]
            out[idx[:, 0]] = np.sum(U * V, axis=1)
            out[idx[:, 1:]] = U[:, :1] * V[:, 1:] + V[:, :1] * U[:, 1:]
        return out

    def div(self, lam, d):
        """Solve lam o w = d for w (lam in the interior)."""
        out = np.empty(self.dim)
        l = self.l
        out[:l] = d[:l] / lam[:l]
        for dim, idx in self.groups:
            L, D = lam[idx], d[idx]
            l0 = L[:, 0]
            l1 = L[:, 1:]
            det = l0 * l0 - np.sum(l1 * l1, axis=1)
            w0 = (l0 * D[:, 0] - np.sum(l1 * D[:, 1:], axis=1)) / det
            out[idx[:, 0]] = w0
            out[idx[:, 1:]] = (D[:, 1:] - w0[:, None] * l1) / l0[:, None]
        return out

    def margin(self, x):
        """Smallest 'eigenvalue' of x: min over x_i and x0 - ||x1||."""
        m = np.inf
        if self.l:
            m = min(m, float(np.min(x[: self.l])))
        for d, idx in self.groups:
            X = x[idx]
            m = min(m, float(np.min(X[:, 0] - np.linalg.norm(X[:, 1:], axis=1))))
        return m

    def shift_into(self, x):
        """alpha such that x + alpha e is on the cone boundary, i.e. -margin(x)."""
        return -self.margin(x)

    def max_step(self, x, dx):
        """Largest alpha with x + alpha dx in the cone (x assumed interior)."""
        alpha = np.inf
        l = self.l
        if l:
            neg = dx[:l] < 0
            if np.any(neg):
                alpha = min(alpha, float(np.min(-x[:l][neg] / dx[:l][neg])))
        for d, idx in self.groups:
            X, D = x[idx], dx[idx]
            x0, x1 = X[:, 0], X[:, 1:]
            d0, d1 = D[:, 0], D[:, 1:]
            nx1 = np.linalg.norm(x1, axis=1)
            a = d0 * d0 - np.sum(d1 * d1, axis=1)
            b = 2 * (x0 * d0 - np.sum(x1 * d1, axis=1))
            c = np.maximum((x0 - nx1) * (x0 + nx1), 0.0)
            disc = b * b - 4 * a * c
            use = (a <= 0) | ((b < 0) & (disc >= 0))
            den = -b + np.sqrt(np.maximum(disc, 0.0))
            with np.errstate(divide="ignore", invalid="ignore"):
                cand = np.where(use & (den > 0), 2 * c / den, np.inf)
            if cand.size:
                alpha = min(alpha, float(np.min(cand)))
        return alpha


class NTScaling:
    """Nesterov-Todd scaling W with W z = W^{-1} s = lambda.

    Orthant: W = diag(sqrt(s/z)). Second-order cone: W = eta (2 v v^T - J),
    W^{-1} = (2 J v v^T J - J) / eta with v the Jordan square root of the
    normalised scaling point.
    """

    def __init__(self, cones, s, z):
        self.cones = cones
        l = cones.l
        self.d = np.sqrt(s[:l] / z[:l])
        self.blocks = []
        for dim, idx in cones.groups:
            S, Z = s[idx], z[idx]
            ss = S[:, 0] ** 2 - np.sum(S[:, 1:] ** 2, axis=1)
            zz = Z[:, 0] ** 2 - np.sum(Z[:, 1:] ** 2, axis=1)
            sb = S / np.sqrt(ss)[:, None]
            zb = Z / np.sqrt(zz)[:, None]
            gamma = np.sqrt((1 + np.sum(sb * zb, axis=1)) / 2)
            wb = sb.copy()
            wb[:, 0] += zb[:, 0]
            wb[:, 1:] -= zb[:, 1:]
            wb /= (2 * gamma)[:, None]
            v = wb.copy()
            v[:, 0] += 1.0
            v /= np.sqrt(2 * (wb[:, 0] + 1))[:, None]
            eta = (ss / zz) ** 0.25
            self.blocks.append((idx, v, eta))

    def apply(self, u, inverse=False):
        out = np.empty_like(u)
        l = self.cones.l
        out[:l] = u[:l] / self.d if inverse else u[:l] * self.d
        for idx, v, eta in self.blocks:
            U = u[idx]
            if inverse:
                jv = v.copy()
                jv[:, 1:] *= -1
                ju = U.copy()
                ju[:, 1:] *= -1
                r = 2 * jv * np.sum(jv * U, axis=1)[:, None] - ju
                out[idx] = r / eta[:, None]
            else:
                ju = U.copy()
                ju[:, 1:] *= -1
                r = 2 * v * np.sum(v * U, axis=1)[:, None] - ju
                out[idx] = r * eta[:, None]
        return out

    def square_blocks(self):
        """(diag of orthant part, list of (idx, dense W^2 blocks))."""
        out = []
        for idx, v, eta in self.blocks:
            k, d = v.shape
            J = np.diag(np.r_[1.0, -np.ones(d - 1)])
            H = 2 * v[:, :, None] * v[:, None, :] - J[None]
            W2 = (eta ** 2)[:, None, None] * np.einsum("kij,kjl->kil", H, H)
            out.append((idx, W2))
        return self.d ** 2, out

"""Primal-dual interior-point method for LP + SOC programs.

Homogeneous self-dual embedding with Nesterov-Todd scaling and a Mehrotra
predictor-corrector, in the style of the coneqp/conelp family. Problems
arrive in standard form

    min c^T x   s.t.   A x = b,   G x + s = h,   s in K,

with K a product of a nonnegative orthant and second-order cones.
"""

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .cones import ConeProduct, NTScaling

DEFAULTS = {
    "feastol": 1e-8,
    "abstol": 1e-8,
    "reltol": 1e-8,
    "max_iter": 200,
    "reduced_tol": 1e-6,
    "static_reg": 1e-9,
    "refine_steps": 3,
    "equilibrate": True,
    "ruiz_iters": 15,
    "step_fraction": 0.99,
}


class _KKT:
    """Factorisation of [[0, A', G'], [A, 0, 0], [G, 0, -W^2]] with static regularisation."""

    def __init__(self, A, G, scaling, reg, refine):
        n, p, m = A.shape[1], A.shape[0], G.shape[0]
        diag, blocks = scaling.square_blocks()
        rows = [np.arange(scaling.cones.l)]
        cols = [np.arange(scaling.cones.l)]
        vals = [diag]
        for idx, W2 in blocks:
            k, d = idx.shape
            rows.append(np.repeat(idx, d, axis=1).ravel())
            cols.append(np.tile(idx, (1, d)).ravel())
            vals.append(W2.ravel())
        W2 = sp.csc_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(m, m))
        self.K = sp.bmat([[None, A.T, G.T], [A, None, None], [G, None, -W2]], format="csc")
        if self.K.shape != (n + p + m, n + p + m):
            # bmat drops empty blocks' shapes when A has no rows
            self.K = sp.bmat([[sp.csc_matrix((n, n)), A.T, G.T],
                              [A, sp.csc_matrix((p, p)), sp.csc_matrix((p, m))],
                              [G, sp.csc_matrix((m, p)), -W2]], format="csc")
        D = np.r_[np.full(n, reg), np.full(p, -reg), np.full(m, -reg)]
        Kreg = (self.K + sp.diags(D)).tocsc()
        self.lu = spla.splu(Kreg, permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0,
                            options={"SymmetricMode": True})
        self.refine = refine
        self.sizes = (n, p, m)

    def solve(self, rx, ry, rz):
        rhs = np.r_[rx, ry, rz]
        sol = self.lu.solve(rhs)
        for _ in range(self.refine):
            res = rhs - self.K @ sol
            if np.linalg.norm(res, np.inf) <= 1e-14 * (1 + np.linalg.norm(rhs, np.inf)):
                break
            sol = sol + self.lu.solve(res)
        n, p, m = self.sizes
        return sol[:n], sol[n:n + p], sol[n + p:]


def _ruiz(A, G, cones, iters):
    """Row/column equilibration; rows of one second-order cone share a factor."""
    n = A.shape[1]
    D = np.ones(n)
    EA = np.ones(A.shape[0])
    EG = np.ones(G.shape[0])
    As, Gs = A.tocsc(copy=True), G.tocsc(copy=True)
    for _ in range(iters):
        colA = abs(As).max(axis=0).toarray().ravel() if As.shape[0] else np.zeros(n)
        colG = abs(Gs).max(axis=0).toarray().ravel() if Gs.shape[0] else np.zeros(n)
        col = np.maximum(colA, colG)
        col[col == 0] = 1.0
        rowA = abs(As).max(axis=1).toarray().ravel() if As.shape[0] else np.zeros(0)
        rowG = abs(Gs).max(axis=1).toarray().ravel() if Gs.shape[0] else np.zeros(0)
        for d, idx in cones.groups:
            rowG[idx] = rowG[idx].max(axis=1, keepdims=True)
        rowA[rowA == 0] = 1.0
        rowG[rowG == 0] = 1.0
        dc = 1 / np.sqrt(np.clip(col, 1e-4, 1e4))
        da = 1 / np.sqrt(np.clip(rowA, 1e-4, 1e4))
        dg = 1 / np.sqrt(np.clip(rowG, 1e-4, 1e4))
        D *= dc
        EA *= da
        EG *= dg
        As = sp.diags(da) @ As @ sp.diags(dc)
        Gs = sp.diags(dg) @ Gs @ sp.diags(dc)
        if max(abs(1 - col).max(initial=0), abs(1 - rowA).max(initial=0), abs(1 - rowG).max(initial=0)) < 1e-3:
            break
    return D, EA, EG, As.tocsr(), Gs.tocsr()


def solve(form, settings=None):
    opts = dict(DEFAULTS)
    opts.update(settings or {})
    cones = ConeProduct(form.l, form.q)
    A = form.A.tocsr()
    G = form.G.tocsr()
    c, b, h = form.c.astype(float), form.b.astype(float), form.h.astype(float)
    n = A.shape[1]

    if opts["equilibrate"] and (A.nnz + G.nnz):
        D, EA, EG, A, G = _ruiz(A, G, cones, opts["ruiz_iters"])
        c = D * c
        b = EA * b
        h = EG * h
    else:
        D, EA, EG = np.ones(n), np.ones(A.shape[0]), np.ones(G.shape[0])
    sc = 1.0 / max(1.0, np.linalg.norm(c, np.inf))
    sb = 1.0 / max(1.0, np.linalg.norm(np.r_[b, h], np.inf))
    c, b, h = c * sc, b * sb, h * sb

    result = _hsd(A, b, G, h, c, cones, opts)
    if result.get("x") is not None:
        result["x"] = D * result["x"] / sb
        result["y"] = EA * result["y"] / sc
        result["z"] = EG * result["z"] / sc
    return result


def _hsd(A, b, G, h, c, cones, opts):
    n, p, m = A.shape[1], A.shape[0], G.shape[0]
    e = cones.identity()
    feastol, abstol, reltol = opts["feastol"], opts["abstol"], opts["reltol"]
    reg, refine = opts["static_reg"], opts["refine_steps"]
    frac = opts["step_fraction"]

    resx0 = max(1.0, np.linalg.norm(c))
    resy0 = max(1.0, np.linalg.norm(b))
    resz0 = max(1.0, np.linalg.norm(h))

    # starting point from two least-squares problems with W = I
    ident = NTScaling(cones, e.copy(), e.copy())
    kkt = _KKT(A, G, ident, reg, refine)
    x, y, zt = kkt.solve(np.zeros(n), b, h)
    s = -zt
    _, y2, z = kkt.solve(-c, np.zeros(p), np.zeros(m))
    y = y2
    nrms, nrmz = np.linalg.norm(s), np.linalg.norm(z)
    ts = cones.shift_into(s)
    tz = cones.shift_into(z)
    if ts >= -1e-8 * max(nrms, 1.0):
        s = s + (1 + ts) * e
    if tz >= -1e-8 * max(nrmz, 1.0):
        z = z + (1 + tz) * e
    tau, kappa = 1.0, 1.0

    best = None
    status = "numerical-limit"
    info = {}
    it = 0
    for it in range(opts["max_iter"] + 1):
        r1 = A.T @ y + G.T @ z + c * tau
        r2 = -(A @ x) + b * tau
        r3 = -(G @ x) + h * tau - s
        r4 = -(c @ x) - (b @ y) - (h @ z) - kappa

        pcost = (c @ x) / tau
        dcost = -((b @ y) + (h @ z)) / tau
        gap = (s @ z) / tau ** 2
        pres = max(np.linalg.norm(r2) / resy0, np.linalg.norm(r3) / resz0) / tau
        dres = np.linalg.norm(r1) / resx0 / tau
        if pcost < 0:
            relgap = gap / -pcost
        elif dcost > 0:
            relgap = gap / dcost
        else:
            relgap = np.inf
        info = {"pcost": pcost, "dcost": dcost, "gap": gap, "relgap": relgap,
                "pres": pres, "dres": dres, "tau": tau, "kappa": kappa}

        if pres <= feastol and dres <= feastol and (gap <= abstol or relgap <= reltol):
            status = "optimal"
            break
        hz_by = (h @ z) + (b @ y)
        if hz_by < 0:
            pinf = np.linalg.norm(A.T @ y + G.T @ z) / resx0 / -hz_by
            if pinf <= feastol:
                status = "infeasible"
                info["certificate"] = pinf
                break
        cx = c @ x
        if cx < 0:
            dinf = max(np.linalg.norm(A @ x) / resy0, np.linalg.norm(G @ x + s) / resz0) / -cx
            if dinf <= feastol:
                status = "unbounded"
                info["certificate"] = dinf
                break
        score = max(pres, dres, min(relgap, gap))
        if best is None or score < best[0]:
            best = (score, x / tau, y / tau, z / tau, dict(info))
        if it == opts["max_iter"]:
            break

        try:
            W = NTScaling(cones, s, z)
            lam = W.apply(z)
            kkt = _KKT(A, G, W, reg, refine)
        except (RuntimeError, FloatingPointError, ValueError) as exc:
            info["error"] = str(exc)
            break
        mu = ((s @ z) + tau * kappa) / (cones.degree + 1)

        u2 = kkt.solve(-c, b, h)
        f2 = -(c @ u2[0]) - (b @ u2[1]) - (h @ u2[2])

        def direction(eta_res, ds, dkappa):
            dx, dy, dz, dtau_rhs = -eta_res * r1, -eta_res * r2, -eta_res * r3, -eta_res * r4
            lds = cones.div(lam, ds)
            wlds = W.apply(lds)
            u1 = kkt.solve(dx, -dy, -dz - wlds)
            f1 = -(c @ u1[0]) - (b @ u1[1]) - (h @ u1[2])
            dtau = (dtau_rhs - f1 + dkappa / tau) / (f2 + kappa / tau)
            Dx = u1[0] + dtau * u2[0]
            Dy = u1[1] + dtau * u2[1]
            Dz = u1[2] + dtau * u2[2]
            Ds = W.apply(lds - W.apply(Dz))
            Dk = (dkappa - kappa * dtau) / tau
            return Dx, Dy, Dz, Ds, dtau, Dk

        def step_to_boundary(Ds, Dz, dtau, Dk):
            a = min(cones.max_step(s, Ds), cones.max_step(z, Dz))
            if dtau < 0:
                a = min(a, -tau / dtau)
            if Dk < 0:
                a = min(a, -kappa / Dk)
            return a

        with np.errstate(all="ignore"):
            aff = direction(1.0, -cones.prod(lam, lam), -tau * kappa)
            alpha_a = min(1.0, step_to_boundary(aff[3], aff[2], aff[4], aff[5]))
            sigma = (1 - alpha_a) ** 3
            corr = cones.prod(W.apply(aff[3], inverse=True), W.apply(aff[2]))
            ds = -cones.prod(lam, lam) - corr + sigma * mu * e
            dk = -tau * kappa - aff[4] * aff[5] + sigma * mu
            Dx, Dy, Dz, Ds, dtau, Dk = direction(1.0 - sigma, ds, dk)
            alpha = min(1.0, frac * step_to_boundary(Ds, Dz, dtau, Dk))

        if not np.isfinite(alpha) or alpha < 1e-12 or not all(
                np.all(np.isfinite(v)) for v in (Dx, Dy, Dz, Ds)):
            info["error"] = "step length collapsed"
            break
        x = x + alpha * Dx
        y = y + alpha * Dy
        z = z + alpha * Dz
        s = s + alpha * Ds
        tau = tau + alpha * dtau
        kappa = kappa + alpha * Dk
        if cones.margin(s) <= 0 or cones.margin(z) <= 0 or tau <= 0 or kappa <= 0:
            info["error"] = "iterate left the cone"
            break

    if status == "optimal":
        return {"status": status, "x": x / tau, "y": y / tau, "z": z / tau,
                "iterations": it, "info": info}
    if status in ("infeasible", "unbounded"):
        return {"status": status, "x": None, "iterations": it, "info": info}
    # stalled or out of iterations: accept the best iterate if close to the tolerances
    red = opts["reduced_tol"]
    if best is not None:
        score, xb, yb, zb, binfo = best
        if binfo["pres"] <= red and binfo["dres"] <= red and (binfo["gap"] <= red or binfo["relgap"] <= red):
            binfo["reduced_accuracy"] = True
            binfo["stall_reason"] = info.get("error", "iteration limit")
            return {"status": "optimal", "x": xb, "y": yb, "z": zb, "iterations": it, "info": binfo}
    info.setdefault("error", "iteration limit")
    return {"status": "numerical-limit", "x": None, "iterations": it, "info": info}

"""Backend registry. 'ipm' is the in-house reference solver; 'clarabel' wraps the external one."""

import numpy as np
import scipy.sparse as sp

from . import ipm

_REGISTRY = {}


class Backend:
    name = "base"

    def solve(self, form, settings):
        raise NotImplementedError


class IPMBackend(Backend):
    name = "ipm"

    def solve(self, form, settings):
        return ipm.solve(form, settings)


class ClarabelBackend(Backend):
    name = "clarabel"

    _STATUS = {
        "Solved": "optimal",
        "AlmostSolved": "optimal",
        "PrimalInfeasible": "infeasible",
        "AlmostPrimalInfeasible": "infeasible",
        "DualInfeasible": "unbounded",
        "AlmostDualInfeasible": "unbounded",
    }

    def solve(self, form, settings):
        import clarabel

        n = form.c.size
        Amat = sp.vstack([form.A, form.G]).tocsc()
        rhs = np.r_[form.b, form.h]
        cones = []
        if form.A.shape[0]:
            cones.append(clarabel.ZeroConeT(form.A.shape[0]))
        if form.l:
            cones.append(clarabel.NonnegativeConeT(form.l))
        for d in form.q:
            cones.append(clarabel.SecondOrderConeT(d))
        opts = clarabel.DefaultSettings()
        opts.verbose = False
        tol = settings.get("feastol", 1e-8)
        opts.tol_feas = tol
        opts.tol_gap_abs = settings.get("abstol", 1e-8)
        opts.tol_gap_rel = settings.get("reltol", 1e-8)
        opts.max_iter = settings.get("max_iter", 200)
        P = sp.csc_matrix((n, n))
        sol = clarabel.DefaultSolver(P, form.c, Amat, rhs, cones, opts).solve()
        status = self._STATUS.get(str(sol.status), "numerical-limit")
        info = {"raw_status": str(sol.status)}
        if str(sol.status).startswith("Almost"):
            info["reduced_accuracy"] = True
        if status != "optimal":
            return {"status": status, "x": None, "iterations": sol.iterations, "info": info}
        return {"status": status, "x": np.asarray(sol.x), "iterations": sol.iterations, "info": info}


def register_backend(backend):
    _REGISTRY[backend.name] = backend


def get_backend(name):
    if name not in _REGISTRY:
        raise KeyError(f"unknown backend {name!r}; registered: {sorted(_REGISTRY)}")
    return _REGISTRY[name]


def available_backends():
    return sorted(_REGISTRY)


register_backend(IPMBackend())
register_backend(ClarabelBackend())

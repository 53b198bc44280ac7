"""Solver-agnostic conic program: variables, affine expressions and cone rows.

Rows come in four kinds:
  eq    expr == 0
  le    expr <= 0
  soc   ||(x_1..x_k)|| <= t            exprs = [t, x_1, ..., x_k]
  rsoc  2 a b >= ||(x_1..x_k)||^2, a, b >= 0   exprs = [a, b, x_1, ..., x_k]
"""

import math
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from ..errors import ConfigError

ROW_KINDS = ("eq", "le", "soc", "rsoc")
SENSES = ("min", "max")
_INF = float("inf")


class ProgramError(ConfigError):
    """Malformed program or expression."""


class Affine:
    """Sparse affine expression sum_i c_i x_i + const over program variables."""

    __slots__ = ("terms", "const")

    def __init__(self, terms=None, const=0.0):
        self.terms = dict(terms) if terms else {}
        self.const = float(const)

    @staticmethod
    def lift(value):
        if isinstance(value, Affine):
            return value
        if isinstance(value, (int, float, np.floating, np.integer)):
            if not math.isfinite(value):
                raise ProgramError(f"non-finite constant {value} in expression")
            return Affine(None, float(value))
        raise ProgramError(f"cannot use {type(value).__name__} in an affine expression")

    def copy(self):
        return Affine(self.terms, self.const)

    def __add__(self, other):
        other = Affine.lift(other)
        out = Affine(self.terms, self.const + other.const)
        t = out.terms
        for k, v in other.terms.items():
            t[k] = t.get(k, 0.0) + v
        return out

    __radd__ = __add__

    def __neg__(self):
        return Affine({k: -v for k, v in self.terms.items()}, -self.const)

    def __sub__(self, other):
        return self + (-Affine.lift(other))

    def __rsub__(self, other):
        return Affine.lift(other) + (-self)

    def __mul__(self, scalar):
        if isinstance(scalar, Affine):
            raise ProgramError("product of two expressions is not affine")
        s = float(scalar)
        if not math.isfinite(s):
            raise ProgramError("non-finite coefficient")
        return Affine({k: v * s for k, v in self.terms.items()}, self.const * s)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / float(scalar))

    def value(self, x):
        out = self.const
        for k, v in self.terms.items():
            out += v * x[k]
        return out

    def __repr__(self):
        parts = [f"{v:+.6g}*x{k}" for k, v in sorted(self.terms.items())]
        return " ".join(parts + [f"{self.const:+.6g}"])


def dot(coefs, exprs):
    out = Affine()
    for c, e in zip(coefs, exprs):
        if c != 0.0:
            out = out + Affine.lift(e) * c
    return out


@dataclass(frozen=True)
class Variable:
    index: int
    name: str
    lo: float
    hi: float
    role: str


@dataclass
class Row:
    kind: str
    exprs: list
    tag: str = ""


@dataclass
class SolveResult:
    status: str
    primal: dict = None
    x: np.ndarray = None
    objective_value: float = float("nan")
    max_residual: float = float("nan")
    iterations: int = 0
    wall_time: float = 0.0
    info: dict = field(default_factory=dict)

    @property
    def optimal(self):
        return self.status == "optimal"


@dataclass
class StandardForm:
    """min c^T x  s.t.  A x = b,  G x + s = h,  s in R+^l x SOC(q_1) x ..."""
    c: np.ndarray
    A: sp.csr_matrix
    b: np.ndarray
    G: sp.csr_matrix
    h: np.ndarray
    l: int
    q: list
    obj_sign: float
    obj_const: float


def _clean_tag(tag):
    return str(tag).replace(" ", "_").replace("|", "/") or "-"


class ConvexProgram:

    def __init__(self, name="program"):
        self.name = _clean_tag(name)
        self.variables = []
        self.by_name = {}
        self.rows = []
        self.objective = Affine()
        self.sense = "min"

    # -- building ---------------------------------------------------------

    def add_variable(self, name, lo=-_INF, hi=_INF, role="core"):
        name = _clean_tag(name)
        if name in self.by_name:
            raise ProgramError(f"duplicate variable name {name}")
        lo, hi = float(lo), float(hi)
        if math.isnan(lo) or math.isnan(hi):
            raise ProgramError(f"NaN bound on {name}")
        v = Variable(len(self.variables), name, lo, hi, _clean_tag(role))
        self.variables.append(v)
        self.by_name[name] = v
        return Affine({v.index: 1.0})

    def var(self, name):
        return Affine({self.by_name[name].index: 1.0})

    def _check(self, expr):
        expr = Affine.lift(expr)
        n = len(self.variables)
        for k, v in expr.terms.items():
            if not 0 <= k < n:
                raise ProgramError(f"expression references unknown variable index {k}")
            if not math.isfinite(v):
                raise ProgramError("non-finite coefficient in expression")
        return expr

    def _add(self, kind, exprs, tag):
        row = Row(kind, [self._check(e) for e in exprs], _clean_tag(tag))
        self.rows.append(row)
        return len(self.rows) - 1

    def add_eq(self, lhs, rhs=0.0, tag=""):
        return self._add("eq", [Affine.lift(lhs) - rhs], tag)

    def add_le(self, lhs, rhs=0.0, tag=""):
        """lhs <= rhs."""
        return self._add("le", [Affine.lift(lhs) - rhs], tag)

    def add_ge(self, lhs, rhs=0.0, tag=""):
        return self._add("le", [Affine.lift(rhs) - lhs], tag)

    def add_soc(self, t, xs, tag=""):
        if len(xs) == 0:
            raise ProgramError("second-order cone needs at least one component")
        return self._add("soc", [t] + list(xs), tag)

    def add_rotated_cone(self, a, b, xs, tag=""):
        """2 a b >= sum x_i^2 with a, b >= 0."""
        if len(xs) == 0:
            raise ProgramError("rotated cone needs at least one component")
        return self._add("rsoc", [a, b] + list(xs), tag)

    def lower_psd2(self, m11, m12, m22, tag=""):
        """[[m11, m12], [m12, m22]] PSD as m11 >= 0, m22 >= 0, m11 m22 >= m12^2."""
        h1 = self.add_ge(m11, 0.0, tag=f"{tag}:m11")
        h2 = self.add_ge(m22, 0.0, tag=f"{tag}:m22")
        h3 = self.add_rotated_cone(m11, Affine.lift(m22) * 0.5, [m12], tag=f"{tag}:det")
        return h1, h2, h3

    def set_objective(self, expr, sense="min"):
        if sense not in SENSES:
            raise ProgramError(f"objective sense must be one of {SENSES}")
        self.objective = self._check(expr)
        self.sense = sense

    # -- inspection -------------------------------------------------------

    @property
    def n(self):
        return len(self.variables)

    def count(self, exclude_roles=("aux",)):
        return sum(1 for v in self.variables if v.role not in exclude_roles)

    def validate(self):
        for v in self.variables:
            if v.lo > v.hi:
                raise ProgramError(f"variable {v.name} has empty box [{v.lo}, {v.hi}]")
        n = self.n
        for i, row in enumerate(self.rows):
            if row.kind not in ROW_KINDS:
                raise ProgramError(f"row {i} has unknown kind {row.kind}")
            need = {"eq": 1, "le": 1, "soc": 2, "rsoc": 3}[row.kind]
            if row.kind in ("eq", "le") and len(row.exprs) != 1:
                raise ProgramError(f"row {i} must hold exactly one expression")
            if len(row.exprs) < need:
                raise ProgramError(f"row {i} ({row.kind}) has too few expressions")
            for e in row.exprs:
                for k in e.terms:
                    if not 0 <= k < n:
                        raise ProgramError(f"row {i} references unknown variable {k}")
        for k in self.objective.terms:
            if not 0 <= k < n:
                raise ProgramError(f"objective references unknown variable {k}")

    def values(self, x, names=None):
        if names is None:
            return {v.name: float(x[v.index]) for v in self.variables}
        return {n: float(x[self.by_name[n].index]) for n in names}

    def objective_at(self, x):
        return self.objective.value(x)

    def residuals(self, x):
        """Largest violation per row kind and for bounds; all zero when feasible."""
        out = {"bounds": 0.0, "eq": 0.0, "le": 0.0, "soc": 0.0, "rsoc": 0.0}
        for v in self.variables:
            out["bounds"] = max(out["bounds"], v.lo - x[v.index], x[v.index] - v.hi)
        for row in self.rows:
            vals = [e.value(x) for e in row.exprs]
            if row.kind == "eq":
                r = abs(vals[0])
            elif row.kind == "le":
                r = vals[0]
            elif row.kind == "soc":
                r = math.sqrt(sum(t * t for t in vals[1:])) - vals[0]
            else:
                a, b = vals[0], vals[1]
                w = math.sqrt(sum(t * t for t in vals[2:]))
                # distance-like measure of 2ab >= |w|^2 through the equivalent SOC form
                r = max(math.hypot(a - b, math.sqrt(2) * w) - (a + b), -a, -b)
            out[row.kind] = max(out[row.kind], r)
        return {k: max(v, 0.0) for k, v in out.items()}

    def max_residual(self, x):
        return max(self.residuals(x).values())

    # -- canonical text form ---------------------------------------------

    @staticmethod
    def _fmt_expr(e):
        parts = [repr(e.const)] + [f"{k}:{v!r}" for k, v in sorted(e.terms.items())]
        return " ".join(parts)

    @staticmethod
    def _parse_expr(text):
        items = text.split()
        e = Affine(None, float(items[0]))
        for item in items[1:]:
            k, v = item.split(":")
            e.terms[int(k)] = float(v)
        return e

    def dump(self):
        lines = [f"program {self.name}"]
        for v in self.variables:
            lines.append(f"var {v.index} {v.name} {v.lo!r} {v.hi!r} {v.role}")
        lines.append(f"objective {self.sense} | {self._fmt_expr(self.objective)}")
        for row in self.rows:
            body = " | ".join(self._fmt_expr(e) for e in row.exprs)
            lines.append(f"row {row.kind} {row.tag} | {body}")
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text):
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("program "):
            raise ProgramError("canonical dump must start with a 'program' line")
        prog = cls(lines[0].split(None, 1)[1])
        for ln in lines[1:]:
            head, _, rest = ln.partition(" | ") if " | " in ln else (ln, None, "")
            fields = head.split()
            if fields[0] == "var":
                idx, name, lo, hi, role = int(fields[1]), fields[2], float(fields[3]), float(fields[4]), fields[5]
                if idx != prog.n:
                    raise ProgramError(f"variable index {idx} out of order")
                prog.add_variable(name, lo, hi, role)
            elif fields[0] == "objective":
                prog.objective = prog._parse_expr(rest)
                prog.sense = fields[1]
            elif fields[0] == "row":
                exprs = [prog._parse_expr(p) for p in rest.split(" | ")]
                prog.rows.append(Row(fields[1], exprs, fields[2]))
            else:
                raise ProgramError(f"unrecognised dump line: {ln[:40]}")
        prog.validate()
        return prog

    # -- lowering ----------------------------------------------------------

    def to_standard_form(self):
        self.validate()
        n = self.n
        eq_rows, eq_b = [], []
        lin_rows, lin_h = [], []
        soc_blocks = []

        def coeffs(e):
            return e.terms

        # orthant rows are kept as (coef, rhs) of coef.x <= rhs, i.e. directly as G and h;
        # cone components are affine expressions s_i = const - (-coef).x
        for v in self.variables:
            if math.isfinite(v.lo) and v.lo == v.hi:
                eq_rows.append({v.index: 1.0})
                eq_b.append(v.lo)
                continue
            if math.isfinite(v.lo):
                lin_rows.append({v.index: -1.0})
                lin_h.append(-v.lo)
            if math.isfinite(v.hi):
                lin_rows.append({v.index: 1.0})
                lin_h.append(v.hi)

        for row in self.rows:
            if row.kind == "eq":
                e = row.exprs[0]
                eq_rows.append(coeffs(e))
                eq_b.append(-e.const)
            elif row.kind == "le":
                e = row.exprs[0]
                lin_rows.append(coeffs(e))
                lin_h.append(-e.const)
            elif row.kind == "soc":
                soc_blocks.append(row.exprs)
            else:
                a, b = row.exprs[0], row.exprs[1]
                comps = [a + b, a - b] + [e * math.sqrt(2.0) for e in row.exprs[2:]]
                soc_blocks.append(comps)

        g_rows = list(lin_rows)
        g_h = list(lin_h)
        q = []
        for block in soc_blocks:
            q.append(len(block))
            for e in block:
                g_rows.append({k: -v for k, v in e.terms.items()})
                g_h.append(e.const)

        A = _rows_to_csr(eq_rows, n)
        G = _rows_to_csr(g_rows, n)
        c = np.zeros(n)
        sign = 1.0 if self.sense == "min" else -1.0
        for k, v in self.objective.terms.items():
            c[k] = sign * v
        return StandardForm(c, A, np.array(eq_b, dtype=float), G, np.array(g_h, dtype=float),
                            len(lin_rows), q, sign, self.objective.const)

    # -- solving -----------------------------------------------------------

    def solve(self, backend="ipm", settings=None):
        from .backends import get_backend
        self.validate()
        start = time.perf_counter()
        form = self.to_standard_form()
        solver = get_backend(backend)
        try:
            raw = solver.solve(form, settings or {})
        except Exception as exc:  # backend failures become a status, never a crash
            return SolveResult("numerical-limit", wall_time=time.perf_counter() - start,
                               info={"error": f"{type(exc).__name__}: {exc}", "backend": backend})
        wall = time.perf_counter() - start
        info = dict(raw.get("info", {}))
        info["backend"] = backend
        status = raw["status"]
        if status != "optimal" or raw.get("x") is None:
            return SolveResult(status, iterations=raw.get("iterations", 0), wall_time=wall, info=info)
        x = np.asarray(raw["x"], dtype=float)
        return SolveResult(status, self.values(x), x, self.objective_at(x), self.max_residual(x),
                           raw.get("iterations", 0), wall, info)


def _rows_to_csr(rows, n):
    indptr = [0]
    indices = []
    data = []
    for r in rows:
        for k, v in r.items():
            if v != 0.0:
                indices.append(k)
                data.append(v)
        indptr.append(len(indices))
    return sp.csr_matrix((np.array(data, dtype=float), np.array(indices, dtype=np.int64),
                          np.array(indptr, dtype=np.int64)), shape=(len(rows), n))

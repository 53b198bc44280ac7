"""End-to-end runs: optimise, verify, and read back plan and power files."""

import csv
from pathlib import Path

import numpy as np

from .energy import PowerSchedule
from .errors import ConfigError, InfeasibleScenarioError
from .platform import build_sweep_plan
from .report import RESULTS, RunReport, provenance_block
from .sca.algorithm import initial_altitudes, optimize
from .sca.problems import build_p5
from .verify import DEFAULT_TOL, verify

MODES = {None: "joint", "P_rad": "fixed-radar-power", "P_com": "fixed-comm-power"}


def _per_n(results):
    return [{"N": r.N, "status": r.status, "reason": r.reason, "coverage_m2": r.coverage,
             "iterations": r.iterations, "converged": r.converged} for r in results]


def run_plan(scenario, n_cap=None, fixed=None, tol=DEFAULT_TOL):
    """Optimise, then re-verify at `tol`. Never raises for an infeasible scenario."""
    fixed = dict(fixed or {})
    mode = MODES[next(iter(fixed), None)] if len(fixed) <= 1 else "fixed-both"
    prov = provenance_block(scenario, {"tol": tol, "n_cap": n_cap})
    try:
        plan, schedule, S, rep = optimize(scenario, n_cap=n_cap, fixed=fixed)
    except InfeasibleScenarioError as exc:
        return RunReport(status="infeasible", trace=exc.trace, provenance=prov, mode=mode, message=str(exc))
    ver = verify(plan, schedule, scenario, tol)
    status = "feasible" if ver.feasible else "verification-failed"
    msg = "" if ver.feasible else "verifier rejected: " + ", ".join(sorted(ver.violations()))
    return RunReport(status, S, rep.N_star, rep.N_up, rep.t_tilde, plan, schedule, rep.trace, ver,
                     _per_n(rep.results), prov, mode, msg)


def program_dump(scenario, report=None, fixed=None):
    """Canonical text of the P5 subproblem at the reported optimum, or at the start point."""
    if report is not None and report.plan is not None:
        z, N = report.plan.altitudes, report.N_star
    else:
        z, N = initial_altitudes(scenario), 2
    prog, _ = build_p5(z, N, scenario, fixed)
    return prog.dump()


def read_power_file(path):
    """Powers in W from a text file: one value for every slot, or one per slot."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read power file {path}: {exc.strerror}") from None
    try:
        values = np.array([float(tok) for tok in text.replace(",", " ").split()])
    except ValueError:
        raise ConfigError(f"power file {path} must hold numbers in W") from None
    if values.size == 0:
        raise ConfigError(f"power file {path} is empty")
    if np.any(values < 0) or not np.all(np.isfinite(values)):
        raise ConfigError(f"power file {path} has negative or non-finite entries")
    return values


def read_power_column(path, column):
    path = Path(path)
    if path.suffix == ".csv" or path.is_dir():
        return read_plan_columns(path)[column]
    return read_power_file(path)


def read_plan_columns(path):
    path = Path(path)
    if path.is_dir():
        path = path / RESULTS
    try:
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise ConfigError(f"cannot read plan {path}: {exc.strerror}") from None
    if not rows:
        raise ConfigError(f"plan {path} has no slots")
    try:
        return {k: np.array([float(r[k]) for r in rows]) for k in rows[0]}
    except (TypeError, ValueError):
        raise ConfigError(f"plan {path} has non-numeric entries") from None


def load_plan(path, scenario):
    """(plan, schedule) from a results CSV written by `export`."""
    cols = read_plan_columns(path)
    need = ("z_m", "P_rad_w", "P_com_w", "P_mot_w", "P_har_w", "E_j")
    missing = [c for c in need if c not in cols]
    if missing:
        raise ConfigError(f"plan file lacks column(s) {missing}")
    MN = cols["z_m"].size
    M = scenario.M
    if MN % M:
        raise ConfigError(f"plan has {MN} slots, not a multiple of M = {M}")
    N = MN // M
    z = cols["z_m"].reshape(M, N)
    if np.any(np.ptp(z, axis=1) > 1e-9 * np.max(z)):
        raise ConfigError("altitude varies within a sweep")
    plan = build_sweep_plan(z[:, 0], scenario.geometry(N))
    schedule = PowerSchedule(cols["P_rad_w"], cols["P_com_w"], cols["P_mot_w"], cols["P_har_w"], cols["E_j"])
    return plan, schedule


def validate_plan(path, scenario, tol=DEFAULT_TOL):
    plan, schedule = load_plan(path, scenario)
    return verify(plan, schedule, scenario, tol)

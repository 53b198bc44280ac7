"""Run reports and their on-disk form: CSV tables, summary JSON and plot scripts."""

import csv
import json
import platform as _platform
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .energy import select_efficiency
from .errors import HapsarError
from .platform import azimuths, coverage_increments, positions
from .sensing import backhaul_rate, link_distance, radar_snr, sar_data_rate

RESULTS = "results.csv"
ENERGY = "energy.csv"
CONVERGENCE = "convergence.csv"
SUMMARY = "summary.json"


class ExportError(HapsarError, OSError):
    """Writing a report file failed."""


def load_columns():
    text = (resources.files("hapsar") / "schema" / "columns.json").read_text()
    spec = json.loads(text)
    return {name: [c["name"] for c in f["columns"]] for name, f in spec["files"].items()}


@dataclass
class RunReport:
    status: str = "empty"
    S_star: float = float("nan")
    N_star: int = 0
    N_up: int = 0
    t_tilde: float = float("nan")
    plan: object = None
    schedule: object = None
    trace: list = field(default_factory=list)
    verification: object = None
    per_n: list = field(default_factory=list)
    provenance: dict = field(default_factory=dict)
    mode: str = "joint"
    message: str = ""

    @property
    def feasible(self):
        return self.status == "feasible"


def provenance_block(scenario, extra=None):
    out = {
        "scenario": scenario.name,
        "config_hash": scenario.digest(),
        "seed": scenario.solver.seed,
        "backend": scenario.solver.backend,
        "versions": {"hapsar": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
                     "python": _platform.python_version()},
        "fields": dict(scenario.provenance),
    }
    out.update(extra or {})
    return out


def schedule_rows(report, scenario):
    if report.plan is None or report.schedule is None:
        return []
    plan, sch = report.plan, report.schedule
    x, y, z = positions(plan)
    phi = azimuths(plan.N, plan.M)
    V = np.repeat(plan.speeds, plan.N)
    sweep = np.repeat(np.arange(1, plan.M + 1), plan.N)
    pos = np.vstack([x, y, z])
    dS = coverage_increments(plan)
    d = link_distance(pos, scenario.comm)
    need = sar_data_rate(z, scenario.radar, plan.geometry)
    with np.errstate(divide="ignore"):
        rate = backhaul_rate(sch.P_com, pos, scenario.comm)
    slack = rate - need - scenario.comm.rate_margin
    snr = radar_snr(sch.P_rad, z, V, scenario.radar, plan.geometry)
    rows = []
    for i in range(plan.M * plan.N):
        rows.append([i + 1, int(sweep[i]), phi[i], x[i], y[i], z[i], V[i], sch.P_rad[i], sch.P_com[i],
                     sch.P_mot[i], sch.P_har[i], sch.energy[i], dS[i], d[i], need[i], rate[i], slack[i], snr[i]])
    return rows


def energy_rows(report, scenario):
    if report.schedule is None:
        return []
    sch = report.schedule
    P_re = sch.P_re
    eta = select_efficiency(P_re, scenario.platform)
    E_ini = scenario.platform.E_ini
    return [[i + 1, sch.P_mot[i], sch.P_rad[i], sch.P_com[i], sch.P_har[i], P_re[i], eta[i], sch.energy[i],
             sch.energy[i] / E_ini] for i in range(len(sch))]


def convergence_rows(report):
    return [[r.phase, r.N, r.k, r.objective, r.xi, r.status, r.max_residual, r.wall_time] for r in report.trace]


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return str(int(v))
    return v


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if np.isfinite(v) else None
    if isinstance(v, np.integer):
        return int(v)
    return v


def summary_dict(report):
    plan = report.plan
    ver = report.verification
    return _jsonable({
        "status": report.status,
        "mode": report.mode,
        "message": report.message,
        "S_star_m2": report.S_star,
        "N_star": report.N_star,
        "N_up": report.N_up,
        "t_tilde_w": report.t_tilde,
        "altitudes_m": [] if plan is None else plan.altitudes,
        "start_radii_m": [] if plan is None else plan.start_radii,
        "speeds_mps": [] if plan is None else plan.speeds,
        "verification": {} if ver is None else {"feasible": ver.feasible, "tol": ver.tol,
                                                 "residuals": ver.residuals},
        "per_n": report.per_n,
        "provenance": report.provenance,
    })


def _write_csv(path, header, rows):
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for row in rows:
                w.writerow([_fmt(v) for v in row])
    except OSError as exc:
        raise ExportError(f"cannot write {path}: {exc.strerror}") from None


def export(report, scenario, out_dir):
    """Write the CSV tables, summary.json and plot scripts into out_dir. Returns the paths."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ExportError(f"cannot create {out}: {exc.strerror}") from None
    cols = load_columns()
    paths = []
    for name, rows in ((RESULTS, schedule_rows(report, scenario)), (ENERGY, energy_rows(report, scenario)),
                       (CONVERGENCE, convergence_rows(report))):
        _write_csv(out / name, cols[name], rows)
        paths.append(out / name)
    try:
        (out / SUMMARY).write_text(json.dumps(summary_dict(report), indent=2, allow_nan=False))
        paths.append(out / SUMMARY)
        for name, body in PLOT_SCRIPTS.items():
            (out / name).write_text(body)
            paths.append(out / name)
    except OSError as exc:
        raise ExportError(f"cannot write into {out}: {exc.strerror}") from None
    return paths


_PLOT_HEAD = '''"""Regenerate a figure from the CSV files in this directory. Needs matplotlib."""
import csv
import sys
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = Path(__file__).resolve().parent


def read(name):
    with open(HERE / name, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return {k: [float(r[k]) for r in rows] for k in (rows[0].keys() if rows else [])}

'''

PLOT_SCRIPTS = {
    "plot_trajectory.py": _PLOT_HEAD + '''
d = read("results.csv")
if not d:
    sys.exit("results.csv is empty")
fig = plt.figure(figsize=(6, 5))
ax = fig.add_subplot(projection="3d")
sweeps = sorted(set(d["sweep"]))
for m in sweeps:
    idx = [i for i, s in enumerate(d["sweep"]) if s == m]
    xs = [d["x_m"][i] / 1e3 for i in idx]
    ys = [d["y_m"][i] / 1e3 for i in idx]
    zs = [d["z_m"][i] / 1e3 for i in idx]
    ax.plot(xs, ys, zs, marker="o", ms=3, label=f"sweep {int(m)}")
ax.set_xlabel("x (km)")
ax.set_ylabel("y (km)")
ax.set_zlabel("z (km)")
ax.legend()
fig.savefig(HERE / "trajectory.png", dpi=150, bbox_inches="tight")
''',
    "plot_powers.py": _PLOT_HEAD + '''
d = read("results.csv")
if not d:
    sys.exit("results.csv is empty")
fig, axes = plt.subplots(2, 1, sharex=True, figsize=(7, 5))
axes[0].plot(d["n"], d["P_rad_w"], drawstyle="steps-mid")
axes[0].set_ylabel("radar power (W)")
axes[1].plot(d["n"], d["P_com_w"], drawstyle="steps-mid")
axes[1].set_ylabel("comm power (W)")
axes[1].set_xlabel("slot n")
fig.savefig(HERE / "powers.png", dpi=150, bbox_inches="tight")
''',
    "plot_energy.py": _PLOT_HEAD + '''
d = read("energy.csv")
if not d:
    sys.exit("energy.csv is empty")
fig, ax = plt.subplots(figsize=(7, 3.5))
ax.plot(d["n"], d["E/E_ini"])
ax.set_xlabel("slot n")
ax.set_ylabel("E / E_ini")
fig.savefig(HERE / "energy_ratio.png", dpi=150, bbox_inches="tight")
''',
}

"""Command line: plan, bound, oracle, validate.

Exit codes: 0 success, 2 infeasible, 3 verification failure, 4 config error.
"""

import argparse
import json
import logging
import sys
from pathlib import Path

from .config import load_scenario
from .errors import ConfigError, ConstraintError, GridTooLargeError, InfeasibleScenarioError
from .harness import program_dump, read_power_column, run_plan, validate_plan
from .oracle import grid_oracle
from .report import RunReport, _jsonable, export, provenance_block
from .sca.algorithm import phase_one
from .verify import DEFAULT_TOL

EXIT_OK = 0
EXIT_INFEASIBLE = 2
EXIT_VERIFY = 3
EXIT_CONFIG = 4


def build_parser():
    p = argparse.ArgumentParser(prog="hapsar", description="Sweep trajectory and power planning.")
    p.add_argument("-v", "--verbose", action="store_true", help="log per-N progress")
    sub = p.add_subparsers(dest="command", required=True)

    plan = sub.add_parser("plan", help="optimise a scenario and export the result")
    plan.add_argument("--scenario", required=True, type=Path)
    plan.add_argument("--out", type=Path, default=Path("out"))
    plan.add_argument("--n-cap", type=int, default=None, help="upper limit on slots per sweep")
    plan.add_argument("--tol", type=float, default=DEFAULT_TOL, help="verifier tolerance")
    fix = plan.add_mutually_exclusive_group()
    fix.add_argument("--fix-radar-power", type=Path, metavar="FILE",
                     help="radar power in W: one value, one per slot, or a results.csv")
    fix.add_argument("--fix-comm-power", type=Path, metavar="FILE",
                     help="comm power in W: one value, one per slot, or a results.csv")
    plan.add_argument("--dump-program", action="store_true", help="also write program.txt")

    bound = sub.add_parser("bound", help="sweep bound from the energy deficit only")
    bound.add_argument("--scenario", required=True, type=Path)

    orc = sub.add_parser("oracle", help="exhaustive altitude grid search")
    orc.add_argument("--scenario", required=True, type=Path)
    orc.add_argument("--grid", required=True, type=int, help="points per sweep altitude")
    orc.add_argument("--out", type=Path, default=None)

    val = sub.add_parser("validate", help="check a results.csv plan against the raw model")
    val.add_argument("--scenario", required=True, type=Path)
    val.add_argument("--plan", required=True, type=Path)
    val.add_argument("--tol", type=float, default=DEFAULT_TOL)
    return p


def _print(obj):
    print(json.dumps(_jsonable(obj), indent=2, allow_nan=False))


def cmd_plan(args):
    sc = load_scenario(args.scenario)
    fixed = {}
    if args.fix_radar_power is not None:
        fixed["P_rad"] = read_power_column(args.fix_radar_power, "P_rad_w")
    if args.fix_comm_power is not None:
        fixed["P_com"] = read_power_column(args.fix_comm_power, "P_com_w")
    if args.n_cap is not None and args.n_cap < 2:
        raise ConfigError("--n-cap must be at least 2")
    report = run_plan(sc, n_cap=args.n_cap, fixed=fixed, tol=args.tol)
    export(report, sc, args.out)
    if args.dump_program:
        (args.out / "program.txt").write_text(program_dump(sc, report, fixed))
    _print({"status": report.status, "mode": report.mode, "S_star_m2": report.S_star, "N_star": report.N_star,
            "N_up": report.N_up, "out": str(args.out), "message": report.message})
    if report.status == "infeasible":
        return EXIT_INFEASIBLE
    return EXIT_OK if report.feasible else EXIT_VERIFY


def cmd_bound(args):
    sc = load_scenario(args.scenario)
    N_up, t_tilde, z = phase_one(sc)
    _print({"N_up": N_up, "t_tilde_w": t_tilde, "altitudes_m": list(map(float, z))})
    return EXIT_OK


def cmd_oracle(args):
    sc = load_scenario(args.scenario)
    res = grid_oracle(sc, args.grid)
    if args.out is not None:
        rep = RunReport("feasible" if res.verification.feasible else "verification-failed", res.coverage, res.N,
                        plan=res.plan, schedule=res.schedule, verification=res.verification,
                        provenance=provenance_block(sc, {"grid": args.grid}), mode="oracle")
        export(rep, sc, args.out)
    _print({"S_best_m2": res.coverage, "N": res.N, "altitudes_m": list(map(float, res.altitudes)),
            "evaluated": res.evaluated, "feasible": res.verification.feasible})
    return EXIT_OK if res.verification.feasible else EXIT_VERIFY


def cmd_validate(args):
    sc = load_scenario(args.scenario)
    ver = validate_plan(args.plan, sc, args.tol)
    _print({"feasible": ver.feasible, "worst": ver.worst(), "residuals": ver.residuals})
    return EXIT_OK if ver.feasible else EXIT_VERIFY


COMMANDS = {"plan": cmd_plan, "bound": cmd_bound, "oracle": cmd_oracle, "validate": cmd_validate}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, ConstraintError, GridTooLargeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InfeasibleScenarioError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())

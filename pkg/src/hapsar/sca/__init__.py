"""Convexification pieces and the two-phase search driver."""

from .algorithm import (OptimizeReport, SlotCountResult, TraceRow, optimize, phase_one, refine_schedule,
                        run_benchmark, run_sca, sweep_upper_bound)
from .dc import DcPair, ScalarFn, comm_dc_eval, dc_identity_check, linearize_square, propulsion_dc_eval
from .problems import ScaIterate, build_p5, build_p7

__all__ = [
    "DcPair", "OptimizeReport", "ScaIterate", "ScalarFn", "SlotCountResult", "TraceRow",
    "build_p5", "build_p7", "comm_dc_eval", "dc_identity_check", "linearize_square", "optimize",
    "phase_one", "propulsion_dc_eval", "refine_schedule", "run_benchmark", "run_sca", "sweep_upper_bound",
]

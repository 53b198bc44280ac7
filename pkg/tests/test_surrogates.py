import math

import numpy as np
import pytest

from hapsar.atmosphere import harvested_power
from hapsar.conic import ConvexProgram
from hapsar.energy import propulsion_power
from hapsar.errors import ConstraintError
from hapsar.platform import build_sweep_plan, positions, total_coverage
from hapsar.sca.algorithm import (coverage_of, initial_altitudes, optimize, run_sca, sweep_upper_bound)
from hapsar.sca.problems import ScaIterate, build_p5, build_p7
from hapsar.sca.surrogates import KW, SurrogateContext, objective_minorant
from hapsar.sensing import backhaul_rate, radar_snr, sar_data_rate


def minorant_value(ctx, z):
    """Value (m^2) of the coverage minorant built at ctx, evaluated at altitudes z (m)."""
    prog = ConvexProgram()
    Z = [prog.add_variable(f"z[{m}]") for m in range(ctx.M)]
    expr = objective_minorant(prog, ctx, Z)
    Zv = np.asarray(z, dtype=float) / 1e3
    x = list(Zv)
    if prog.n > ctx.M:
        # the exact concave part: qneg = z^T Q- z
        from hapsar.platform import coverage_form
        w, V = np.linalg.eigh(coverage_form(ctx.M))
        neg = w < -1e-12
        x.append(float(np.sum((V[:, neg].T @ Zv) ** 2 * -w[neg])))
    return expr.value(np.array(x)) * 1e6


def test_variable_count(desk):
    for N in (2, 5):
        prog, _ = build_p5(initial_altitudes(desk), N, desk)
        MN = desk.M * N
        assert prog.count() == desk.M + 11 * MN


def test_minorant_tight_and_below(desk, rng):
    ctx = SurrogateContext(desk, 6, [23000.0, 27000.0, 30000.0])
    assert minorant_value(ctx, ctx.z_k) == pytest.approx(coverage_of(ctx.z_k, 6, desk), rel=1e-12)
    for _ in range(50):
        z = rng.uniform(20000, 32000, 3)
        assert minorant_value(ctx, z) <= coverage_of(z, 6, desk) * (1 + 1e-12)


def test_snr_chain_tight_point():
    p = ConvexProgram()
    phi, psi = p.add_variable("phi"), p.add_variable("psi")
    z = p.add_variable("z", 2.0, 2.0)
    P = p.add_variable("P")
    p.lower_psd2(phi, z, 1.0)
    p.lower_psd2(psi, phi, z)
    p.add_ge(P * 1.0, psi * 1.0)   # con. = 1, V = 1
    p.set_objective(P)
    res = p.solve("clarabel")
    assert res.optimal
    assert res.primal["P"] == pytest.approx(8.0, rel=1e-6)
    assert res.primal["psi"] == pytest.approx(8.0, rel=1e-6)
    assert res.primal["phi"] == pytest.approx(4.0, rel=1e-4)


def raw_check(prog_res, handles, N, scenario):
    z = handles.altitudes(prog_res.primal)
    plan = build_sweep_plan(np.clip(z, scenario.platform.z_min, scenario.platform.z_max), scenario.geometry(N))
    x, y, zz = positions(plan)
    V = np.repeat(plan.speeds, N)
    P_rad = handles.powers(prog_res.primal, "P_rad")
    P_com = handles.powers(prog_res.primal, "P_com")
    P_mot = handles.powers(prog_res.primal, "P_mot")
    geo = plan.geometry
    rate = backhaul_rate(P_com, np.vstack([x, y, zz]), scenario.comm)
    link = np.min((rate - sar_data_rate(zz, scenario.radar, geo)) / sar_data_rate(zz, scenario.radar, geo))
    snr = np.min(radar_snr(P_rad, zz, V, scenario.radar, geo) / scenario.radar.snr_min) - 1
    mot = np.min(P_mot / propulsion_power(zz, V, scenario.platform) - 1)
    return link, snr, mot


def test_surrogate_points_are_raw_feasible(desk, rng):
    N = 4
    for _ in range(6):
        zk = rng.uniform(20000, 32000, 3)
        prog, handles = build_p5(ScaIterate(zk), N, desk)
        res = prog.solve("clarabel")
        if not res.optimal:
            continue
        link, snr, mot = raw_check(res, handles, N, desk)
        assert link > -1e-6 and snr > -1e-6 and mot > -1e-6


def test_zero_comm_power_is_infeasible(desk):
    N = 3
    prog, _ = build_p5(initial_altitudes(desk), N, desk, fixed={"P_com": np.zeros(desk.M * N)})
    assert prog.solve("clarabel").status == "infeasible"


def test_fixed_shape_checked(desk):
    with pytest.raises(ConstraintError):
        build_p5(initial_altitudes(desk), 3, desk, fixed={"P_com": np.ones(4)})
    with pytest.raises(ConstraintError):
        build_p5(initial_altitudes(desk), 3, desk, fixed={"P_mot": 1.0})
    with pytest.raises(ConstraintError):
        build_p5(initial_altitudes(desk), 1, desk)
    with pytest.raises(ConstraintError):
        SurrogateContext(desk, 3, [25000.0, 25000.0])
    with pytest.raises(ConstraintError):
        SurrogateContext(desk, 3, [25000.0, 25000.0, 40000.0])


def true_deficit(z, scenario):
    plan = build_sweep_plan(z, scenario.geometry(2))
    pf = scenario.platform
    return float(np.sum(propulsion_power(plan.altitudes, plan.speeds, pf)
                        - harvested_power(plan.altitudes, pf.eta_h, pf.A_panel)))


def test_p7_degenerate_box(desk):
    sc = desk.with_overrides(platform={"z_min": 25000.0, "z_max": 25000.0})
    res = build_p7(np.full(3, 25000.0), sc).solve("clarabel")
    assert res.optimal
    assert res.primal["t_tilde"] * KW == pytest.approx(true_deficit(np.full(3, 25000.0), sc), rel=1e-6)


def test_p7_below_deficit_at_expansion(desk, rng):
    for _ in range(3):
        zk = rng.uniform(20000, 32000, 3)
        res = build_p7(zk, desk).solve("clarabel")
        assert res.optimal
        assert res.primal["t_tilde"] * KW <= true_deficit(zk, desk) * (1 + 1e-6)


def test_sweep_bound_examples(desk):
    assert sweep_upper_bound(80.0, eta=1.0, E_ini=1000.0, delta_t=1.0, N_cap=720) == 12
    assert sweep_upper_bound(0.0, eta=1.0, E_ini=1000.0, delta_t=1.0, N_cap=720) == 720
    assert sweep_upper_bound(-5.0, desk) == desk.mission.N_cap
    assert sweep_upper_bound(1.0, eta=1.0, E_ini=1e9, delta_t=1.0, N_cap=50) == 50
    assert sweep_upper_bound(8.0, eta=1.0, E_ini=1000.0, delta_t=1.0, N_cap=720) == 125
    with pytest.raises(ConstraintError):
        sweep_upper_bound(1.0)


def test_degenerate_altitude_box(desk):
    sc = desk.with_overrides(platform={"z_min": 26000.0, "z_max": 26000.0})
    plan, sched, S, rep = optimize(sc, n_cap=5)
    forced = total_coverage(build_sweep_plan(np.full(3, 26000.0), sc.geometry(rep.N_star)))
    assert S == pytest.approx(forced, rel=1e-12)
    assert all(r.iterations <= 2 for r in rep.results if r.status == "ok")
    assert rep.verification.feasible


def test_run_sca_single_count(desk):
    r = run_sca(desk, 4)
    assert r.status == "ok" and r.converged
    assert r.coverage == pytest.approx(total_coverage(r.plan))
    assert np.all(np.diff(r.history) >= -1e-6 * r.history[-1])


def test_snr_row_tight_at_expansion(desk):
    # with altitudes pinned at the expansion point the smallest admissible radar power is the raw minimum
    from hapsar.sca.surrogates import add_sweep_bounds, build_snr_constraints
    from hapsar.sensing import min_radar_power
    zk = np.array([23000.0, 27000.0, 31000.0])
    ctx = SurrogateContext(desk, 4, zk)
    p = ConvexProgram()
    Z = [p.add_variable(f"z[{m}]", z / 1e3, z / 1e3) for m, z in enumerate(zk)]
    P = [p.add_variable(f"P[{m}]", 0.0) for m in range(3)]
    for m in range(3):
        phi, psi = p.add_variable(f"phi{m}", 0.0), p.add_variable(f"psi{m}", 0.0)
        build_snr_constraints(p, ctx, m * 4 + 1, Z, P[m], phi, psi)
    p.set_objective(P[0] + P[1] + P[2])
    res = p.solve("clarabel")
    assert res.optimal
    plan = build_sweep_plan(zk, desk.geometry(4))
    expect = min_radar_power(zk, plan.speeds, desk.radar, plan.geometry) / KW
    got = np.array([res.primal[f"P[{m}]"] for m in range(3)])
    np.testing.assert_allclose(got, expect, rtol=2e-5)
    assert np.all(got >= expect)

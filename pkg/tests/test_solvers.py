"""Exact enumeration, simulated annealing and the shared move set."""

import numpy as np
import pytest

from conftest import line_document
from tfp_elastic.errors import EnumerationCapExceeded, InfeasibleInstanceError
from tfp_elastic.flow import Plan, check_structural_feasibility
from tfp_elastic.instance import parse_instance
from tfp_elastic.solvers import (
    ExactLimits,
    MoveContext,
    SAConfig,
    default_sa_config,
    estimate_plans,
    initial_plan,
    load_sa_config,
    neighbor,
    repair,
    solve_exact,
    solve_sa,
)
from tfp_elastic.solvers.annealing import calibrate_temperature

from test_flow import fig1_optimum, line3_deferred, yard_c_plan


def test_exact_line3(line3):
    solution = solve_exact(line3)
    assert solution.plan == line3_deferred()
    assert solution.cost.total == 120.0
    assert solution.solver_id == "exact"
    assert solution.iterations > 0


def test_exact_fig1(fig1):
    solution = solve_exact(fig1)
    assert solution.plan == fig1_optimum()
    assert solution.cost.total == 550.0
    assert solution.chains(fig1) == {"A->E": ["A", "F", "E"], "B->C": ["B", "C"]}


def test_exact_fig1_rigid(fig1):
    solution = solve_exact(fig1, rigid=True)
    assert solution.cost.total == 550.0
    assert solution.rigid
    assert solution.rigid_violations == ()
    assert solution.to_document(fig1)["rigid_violations"] == []


def test_exact_yard_c(yard_c):
    solution = solve_exact(yard_c)
    assert solution.cost.total == 1250.0
    assert solution.plan == yard_c_plan()
    assert solution.flow.yard_reclass["C"] == 100.0
    assert solution.flow.yard_reclass["D"] == 300.0
    assert solution.chains(yard_c)["A->E"] == ["A", "C", "D", "E"]


def test_exact_limits(fig1):
    with pytest.raises(EnumerationCapExceeded):
        solve_exact(fig1, ExactLimits(max_yards=4))
    with pytest.raises(EnumerationCapExceeded):
        solve_exact(fig1, ExactLimits(max_plans=1))


def test_exact_limits_from_settings(settings_env):
    settings_env(TFP_EXACT_MAX_PLANS="10", TFP_EXACT_MAX_YARDS="3")
    assert ExactLimits.from_settings() == ExactLimits(max_plans=10, max_yards=3)


def test_estimate_plans_counts_chains_and_paths(line3):
    ctx = MoveContext(line3)
    # A->C direct or via B; the other two shipments run direct
    assert estimate_plans(line3, ctx.cache) == 2.0


def test_initial_plan_is_feasible(fig1, yard_c):
    for inst in (fig1, yard_c):
        ctx = MoveContext(inst)
        plan = initial_plan(ctx)
        assert check_structural_feasibility(inst, plan, ctx.cache) == []
    assert initial_plan(MoveContext(fig1)).x == ()


def test_initial_plan_without_route():
    doc = line_document("AB", {("A", "B"): 5})
    doc["forbidden_services"] = [["A", "B"]]
    with pytest.raises(InfeasibleInstanceError):
        initial_plan(MoveContext(parse_instance(doc)))


def test_neighbors_stay_feasible(fig1, yard_c):
    for inst in (fig1, yard_c):
        ctx = MoveContext(inst)
        rng = np.random.default_rng(7)
        plan = initial_plan(ctx)
        for _ in range(60):
            plan = neighbor(inst, plan, rng, ctx)
            assert check_structural_feasibility(inst, plan, ctx.cache) == []


def test_repair_restores_a_dropped_deferral(yard_c):
    ctx = MoveContext(yard_c)
    plan = initial_plan(ctx)
    via = {k: v for k, v in plan.via.items() if k != ("C", "E")}
    broken = Plan.build(plan.y, via, plan.rank)
    fixed = repair(ctx, broken)
    assert fixed is not None
    assert check_structural_feasibility(yard_c, fixed, ctx.cache) == []


def test_sa_zero_moves_returns_initial_plan(line3):
    solution = solve_sa(line3, SAConfig(max_moves=0))
    assert solution.iterations == 0
    assert solution.cost.total == 150.0
    assert solution.seed == 0


def test_sa_line3_finds_deferral(line3):
    solution = solve_sa(line3, SAConfig(max_moves=400, seed=3))
    assert solution.cost.total == 120.0
    assert solution.solver_id == "sa"


def test_sa_yard_c_keeps_optimum(yard_c):
    solution = solve_sa(yard_c, SAConfig(max_moves=300))
    assert solution.cost.total == 1250.0


def test_sa_is_deterministic(fig1):
    cfg = SAConfig(max_moves=300, seed=11)
    first = solve_sa(fig1, cfg).to_document(fig1)
    second = solve_sa(fig1, cfg).to_document(fig1)
    assert first == second
    assert first["seed"] == 11
    assert first["mode"] == "elastic"


def test_sa_parallel_chains_match_sequential(fig1, settings_env):
    cfg = SAConfig(max_moves=200, seed=5, chains=3)
    sequential = solve_sa(fig1, cfg)
    settings_env(TFP_WORKERS="3")
    parallel = solve_sa(fig1, cfg)
    assert parallel.plan == sequential.plan
    assert parallel.seed == sequential.seed


@pytest.mark.slow
def test_sa_reaches_exact_optimum_on_fig1(fig1):
    exact = solve_exact(fig1)
    for seed in range(3):
        solution = solve_sa(fig1, SAConfig(max_moves=3000, seed=seed, chains=2))
        assert solution.cost.total == pytest.approx(exact.cost.total)


def test_calibrated_temperature_is_positive(fig1):
    ctx = MoveContext(fig1)
    t0 = calibrate_temperature(ctx, initial_plan(ctx), np.random.default_rng(0), SAConfig())
    assert t0 > 0


def test_sa_config_file(tmp_path):
    path = tmp_path / "sa.yaml"
    path.write_text("cooling_ratio: 0.9\nmax_moves: 50\nseed: 2\n")
    cfg = load_sa_config(path, seed=8, chains=None)
    assert cfg.cooling_ratio == 0.9
    assert cfg.max_moves == 50
    assert cfg.seed == 8
    assert cfg.chains == 1

    path.write_text("cooling: 0.9\n")
    with pytest.raises(ValueError):
        load_sa_config(path)
    path.write_text("cooling_ratio: 1.5\n")
    with pytest.raises(ValueError):
        load_sa_config(path)


def test_default_sa_config_reads_environment(tmp_path, settings_env):
    assert default_sa_config(seed=4) == SAConfig(seed=4)
    path = tmp_path / "sa.yaml"
    path.write_text("max_moves: 77\n")
    settings_env(TFP_SA_CONFIG=str(path))
    assert default_sa_config().max_moves == 77

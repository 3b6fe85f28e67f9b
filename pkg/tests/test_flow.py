"""Plans, structural feasibility, flow propagation and strategy chains."""

import json

import pytest

from tfp_elastic.errors import CyclicPlanError, PlanDocumentError, StructuralInfeasibilityError
from tfp_elastic.flow import (
    Plan,
    check_structural_feasibility,
    commodity_pairs,
    count_strategies,
    enumerate_strategies,
    load_plan,
    normalize_plan,
    plan_from_document,
    propagate_flows,
    require_feasible,
    simulate_cars,
    strategy_chain,
    track_demand,
    trains_for,
)
from tfp_elastic.instance import FIG2_SERVICE_NETWORK

YARD_C_LOCALS = [
    ("A", "B"), ("B", "A"), ("B", "C"), ("C", "B"),
    ("C", "D"), ("D", "C"), ("D", "E"), ("E", "D"),
]


def fig1_optimum() -> Plan:
    return Plan.build(
        [("A", "F"), ("F", "E"), ("B", "C")],
        x={("A", "E"): "F"},
        xi={("A", "F"): 0, ("F", "E"): 0, ("B", "C"): 0},
    )


def yard_c_plan() -> Plan:
    services = YARD_C_LOCALS + [("A", "C")]
    return Plan.build(
        services,
        x={("A", "E"): "C", ("C", "E"): "D"},
        xi={pair: 0 for pair in services},
    )


def line3_deferred() -> Plan:
    return Plan.build(
        [("A", "B"), ("B", "C")],
        x={("A", "C"): "B"},
        xi={("A", "B"): 0, ("B", "C"): 0},
    )


def test_plan_build_is_canonical():
    a = Plan.build([("B", "C"), ("A", "B")], x={("A", "C"): "B"}, xi={("B", "C"): 0, ("A", "B"): 0})
    b = Plan.build([("A", "B"), ("B", "C")], x={("A", "C"): "B"}, xi={("A", "B"): 0, ("B", "C"): 0})
    assert a == b
    assert hash(a) == hash(b)
    assert a.services == (("A", "B"), ("B", "C"))
    assert a.to_document()["x"] == [{"pair": ["A", "C"], "via": "B"}]


def test_line3_flows(line3):
    """Deferring A->C to B sorts its 10 cars once, at B."""
    plan = line3_deferred()
    assert check_structural_feasibility(line3, plan) == []
    fs = propagate_flows(line3, plan)
    assert fs.f == {("A", "B"): 5.0, ("A", "C"): 10.0, ("B", "C"): 17.0}
    assert fs.D == {("A", "B"): 15.0, ("B", "C"): 17.0}
    assert fs.yard_reclass == {"A": 0.0, "B": 10.0, "C": 0.0}
    assert fs.link_trains == {"A-B": 1.0, "B-A": 0.0, "B-C": 1.0, "C-B": 0.0}
    assert fs.yard_tracks == {"A": 1.0, "B": 1.0, "C": 0.0}


def test_yard_c_flows(yard_c):
    fs = propagate_flows(yard_c, yard_c_plan())
    assert fs.f[("C", "E")] == 300.0
    assert fs.f[("D", "E")] == 300.0
    # A->E is sorted at C; the merged C->E commodity of 300 cars at D
    assert fs.yard_reclass == {"A": 0.0, "B": 0.0, "C": 100.0, "D": 300.0, "E": 0.0}
    assert fs.service_load(("C", "D")) == 300.0
    assert fs.service_load(("B", "A")) == 0.0
    # ceil(300/50) trains on C-D, two on the A->C legs
    assert fs.link_trains["C-D"] == 6.0
    assert fs.link_trains["A-B"] == 2.0


def test_single_transfer_sorts_only_at_the_transfer_yard(make_line):
    inst = make_line("ABCDE", {("A", "E"): 100})
    plan = Plan.build(
        [("A", "B"), ("B", "E")], x={("A", "E"): "B"}, xi={("A", "B"): 0, ("B", "E"): 0}
    )
    assert check_structural_feasibility(inst, plan) == []
    for fs in (propagate_flows(inst, plan), simulate_cars(inst, plan)):
        assert fs.yard_reclass == {"A": 0.0, "B": 100.0, "C": 0.0, "D": 0.0, "E": 0.0}
    assert len(strategy_chain(inst, plan, "A", "E")) == 2


def test_reclassification_conservation(yard_c, fig1, line3):
    """Total sorting equals volume times the number of intermediate yards."""
    for inst, plan in (
        (yard_c, yard_c_plan()),
        (fig1, fig1_optimum()),
        (line3, line3_deferred()),
    ):
        fs = propagate_flows(inst, plan)
        expected = 0.0
        for s in inst.shipments:
            chain = strategy_chain(inst, plan, s.origin, s.destination)
            expected += s.volume * (len(chain) - 1)
        assert sum(fs.yard_reclass.values()) == pytest.approx(expected)


def test_propagation_agrees_with_car_simulation(yard_c, fig1, line3):
    for inst, plan in ((yard_c, yard_c_plan()), (fig1, fig1_optimum()), (line3, line3_deferred())):
        fast = propagate_flows(inst, plan)
        slow = simulate_cars(inst, plan)
        assert fast.D == pytest.approx(slow.D)
        assert fast.yard_reclass == pytest.approx(slow.yard_reclass)
        assert fast.link_trains == slow.link_trains


def test_track_demand_and_trains():
    assert track_demand(0, 200) == 0.0
    assert track_demand(15, 200) == 200
    assert track_demand(450, 200) == 450
    assert trains_for(0, 50) == 0.0
    assert trains_for(100, 50) == 2.0
    assert trains_for(101, 50) == 3.0
    assert trains_for(101, 50, fractional=True) == pytest.approx(2.02)


def test_fractional_trains_setting(line3, settings_env):
    settings_env(TFP_FRACTIONAL_TRAINS="1")
    fs = propagate_flows(line3, line3_deferred())
    assert fs.link_trains["A-B"] == pytest.approx(15 / 50)


def test_commodity_pairs_follow_deferrals(yard_c):
    assert commodity_pairs(yard_c, yard_c_plan()) == (("A", "E"), ("C", "E"), ("D", "E"))


def test_missing_mandated_service(yard_c):
    plan = Plan.build(
        [p for p in yard_c_plan().services if p != ("B", "A")],
        x=yard_c_plan().via,
        xi={p: 0 for p in yard_c_plan().services if p != ("B", "A")},
    )
    violations = check_structural_feasibility(yard_c, plan)
    assert [(v.constraint, v.subject) for v in violations] == [("mandate", "B->A")]


def test_forbidden_service(yard_c):
    services = YARD_C_LOCALS + [("A", "C"), ("C", "E")]
    plan = Plan.build(services, x={("A", "E"): "C"}, xi={p: 0 for p in services})
    constraints = {v.constraint for v in check_structural_feasibility(yard_c, plan)}
    assert "forbidden" in constraints


def test_partition_violations(line3):
    both = Plan.build(
        [("A", "B"), ("B", "C"), ("A", "C")],
        x={("A", "C"): "B"},
        xi={("A", "B"): 0, ("B", "C"): 0, ("A", "C"): 0},
    )
    assert [v.constraint for v in check_structural_feasibility(line3, both)] == ["partition"]

    neither = Plan.build([("A", "B"), ("B", "C")], xi={("A", "B"): 0, ("B", "C"): 0})
    violations = check_structural_feasibility(line3, neither)
    assert [(v.constraint, v.subject) for v in violations] == [("partition", "A->C")]


def test_support_and_path_violations(line3):
    plan = Plan.build([("B", "C")], x={("A", "C"): "B"}, xi={("B", "C"): 3})
    violations = {(v.constraint, v.subject) for v in check_structural_feasibility(line3, plan)}
    assert ("support", "A->C") in violations
    assert ("path", "B->C") in violations


def test_candidate_violation(fig1):
    plan = Plan.build(
        [("A", "E"), ("B", "A"), ("A", "C")],
        x={("B", "C"): "A"},
        xi={("A", "E"): 0, ("B", "A"): 0, ("A", "C"): 0},
    )
    violations = check_structural_feasibility(fig1, plan)
    assert ("candidate", "B->C") in {(v.constraint, v.subject) for v in violations}


def test_cyclic_deferrals_are_rejected(make_line):
    inst = make_line("ABCD", {("A", "D"): 10, ("B", "D"): 5})
    plan = Plan.build(
        [("A", "B"), ("B", "C"), ("C", "B")],
        x={("A", "D"): "B", ("B", "D"): "C", ("C", "D"): "B"},
        xi={("A", "B"): 0, ("B", "C"): 0, ("C", "B"): 0},
    )
    violations = check_structural_feasibility(inst, plan)
    assert "acyclicity" in {v.constraint for v in violations}
    with pytest.raises(CyclicPlanError):
        require_feasible(inst, plan)
    with pytest.raises(CyclicPlanError):
        propagate_flows(inst, plan)


def test_require_feasible_raises(line3):
    with pytest.raises(StructuralInfeasibilityError) as exc:
        require_feasible(line3, Plan.build([("A", "B")], xi={("A", "B"): 0}))
    assert exc.value.violations


def test_strategy_chain(yard_c, fig1):
    assert strategy_chain(yard_c, yard_c_plan(), "A", "E") == [("A", "C"), ("C", "D"), ("D", "E")]
    assert strategy_chain(fig1, fig1_optimum(), "B", "C") == [("B", "C")]
    with pytest.raises(StructuralInfeasibilityError):
        strategy_chain(fig1, fig1_optimum(), "A", "D")


def test_fig2_strategy_counts(fig2):
    chains = enumerate_strategies(fig2, FIG2_SERVICE_NETWORK, "A", "E")
    assert ["-".join([u for u, _ in ch] + ["E"]) for ch in chains] == [
        "A-B-C-D-E",
        "A-B-D-E",
        "A-B-E",
        "A-C-D-E",
    ]
    assert count_strategies(fig2, FIG2_SERVICE_NETWORK, "B", "E") == 3


def test_normalize_plan_drops_stale_decisions(line3):
    stale = Plan.build(
        [("A", "B"), ("B", "C"), ("A", "C")],
        x={("C", "A"): "B"},
        xi={("A", "B"): 0, ("B", "C"): 0, ("A", "C"): 0},
    )
    plan = normalize_plan(line3, stale)
    assert plan.x == ()
    assert plan.services == (("A", "B"), ("A", "C"), ("B", "C"))
    assert check_structural_feasibility(line3, plan) == []


def test_plan_document_loading(tmp_path, line3):
    doc = {"y": [["A", "B"], ["B", "C"]], "x": [{"pair": ["A", "C"], "via": "B"}]}
    plan = plan_from_document(line3, doc)
    assert plan == line3_deferred()

    path = tmp_path / "plan.json"
    path.write_text(json.dumps(doc))
    assert load_plan(line3, path) == plan

    with pytest.raises(PlanDocumentError):
        plan_from_document(line3, {"y": [["A", "Q"]]})
    with pytest.raises(PlanDocumentError):
        plan_from_document(line3, {"services": []})
    with pytest.raises(PlanDocumentError):
        load_plan(line3, tmp_path / "missing.json")

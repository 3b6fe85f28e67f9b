"""Daily demand fluctuation against a fixed plan."""

import json

import numpy as np
import pytest

from tfp_elastic.errors import StressSpecError
from tfp_elastic.instance import CapacityBelt
from tfp_elastic.stress import (
    ShipmentDistribution,
    load_stress_spec,
    parse_stress_spec,
    stress,
)

from test_flow import yard_c_plan


def two_point_spec(days: int = 400, seed: int = 0) -> dict:
    return {
        "days": days,
        "seed": seed,
        "shipments": [
            {"pair": ["A", "E"], "kind": "two_point", "v1": 100, "p": 0.5, "v2": 200},
            {"pair": ["C", "E"], "kind": "fixed"},
        ],
    }


def test_two_point_demand_on_the_merged_flow(yard_c):
    """The merged commodity sorted at D is 300 or 400 cars against [250, 350]: degree 0.5 or 0."""
    inst = yard_c.with_belts(reclass={"D": CapacityBelt(250, 350)})
    report = stress(inst, yard_c_plan(), parse_stress_spec(two_point_spec()))
    c = report.resource("yard_reclass", "D")
    assert 0.4 < c.fraction_zero < 0.6
    assert c.fraction_below_one == 1.0
    assert c.mean_degree == pytest.approx(0.5 * (1 - c.fraction_zero))
    assert c.min_degree == 0.0
    assert {d.volumes[("A", "E")] for d in report.days} == {100.0, 200.0}
    assert all(d.volumes[("C", "E")] == 200.0 for d in report.days)


def test_point_belt_penalty_every_day(yard_c):
    inst = yard_c.with_belts(reclass={"D": CapacityBelt(300, 300)})
    spec = parse_stress_spec(
        {"days": 3, "shipments": [{"pair": ["A", "E"], "kind": "fixed", "value": 200}]}
    )
    report = stress(inst, yard_c_plan(), spec)
    assert [d.G for d in report.days] == [151500.0] * 3
    assert report.resource("yard_reclass", "D").fraction_zero == 1.0
    assert report.resource("yard_reclass", "D").mean_load == 400.0
    assert report.resource("yard_reclass", "C").mean_load == 200.0
    assert report.to_document()["penalties"]["total_max"] == 151500.0


def test_days_are_independent_of_run_length(yard_c):
    short = stress(yard_c, yard_c_plan(), parse_stress_spec(two_point_spec(days=5, seed=9)))
    long = stress(yard_c, yard_c_plan(), parse_stress_spec(two_point_spec(days=12, seed=9)))
    assert [d.volumes for d in short.days] == [d.volumes for d in long.days[:5]]


def test_same_seed_same_report(yard_c, settings_env):
    spec = parse_stress_spec(two_point_spec(days=20, seed=4))
    first = stress(yard_c, yard_c_plan(), spec).to_document()
    settings_env(TFP_WORKERS="4")
    assert stress(yard_c, yard_c_plan(), spec).to_document() == first


def test_uniform_draws_are_whole_and_in_range():
    dist = ShipmentDistribution(pair=("A", "E"), kind="uniform", lo=80, hi=120)
    rng = np.random.default_rng(1)
    draws = [dist.sample(rng, 100.0) for _ in range(300)]
    assert min(draws) >= 80
    assert max(draws) <= 120
    assert all(float(v).is_integer() for v in draws)


def test_two_point_rounds_half_up():
    dist = ShipmentDistribution(pair=("A", "E"), kind="two_point", v1=10.5, p=1.0, v2=0)
    assert dist.sample(np.random.default_rng(0), 0.0) == 11.0


def test_spec_overrides_and_errors(tmp_path, yard_c):
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(two_point_spec(days=10)))
    spec = load_stress_spec(path, days=3, seed=7)
    assert (spec.days, spec.seed) == (3, 7)

    with pytest.raises(StressSpecError):
        parse_stress_spec({"days": 0})
    with pytest.raises(StressSpecError):
        parse_stress_spec({"days": 2, "shipments": [{"pair": ["A", "E"], "kind": "uniform"}]})
    with pytest.raises(StressSpecError):
        parse_stress_spec("{bad")
    with pytest.raises(StressSpecError):
        load_stress_spec(tmp_path / "missing.json")

    stray = parse_stress_spec({"days": 1, "shipments": [{"pair": ["B", "E"], "kind": "fixed"}]})
    with pytest.raises(StressSpecError):
        stress(yard_c, yard_c_plan(), stray)

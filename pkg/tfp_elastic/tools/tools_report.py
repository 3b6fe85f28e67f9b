"""Report handler: path sets, candidate yards, strategy chains and plan loads."""

import logging
from typing import Any, Dict, Optional, Sequence

from ..cache import PathCache, get_path_cache
from ..errors import TFPError
from ..flow import (
    Plan,
    chain_yards,
    check_structural_feasibility,
    enumerate_strategies,
    load_plan,
    simulate_cars,
    strategy_chain,
)
from ..instance import Instance, resolve_instance
from .exports import paths_table, resolve_output_dir, write_tables

logger = logging.getLogger(__name__)


def report_instance(
    ref: str,
    paths: bool = False,
    strategies: Optional[Sequence[str]] = None,
    plan_path: Optional[str] = None,
    out: Optional[str] = None,
) -> Dict[str, Any]:
    """
    Describe the routing structure of an instance.

    Args:
        ref: Instance path or `@fixture`
        paths: Include every service's candidate paths (and paths.csv)
        strategies: Origin and destination whose strategy chains are listed
        plan_path: Plan whose services form the strategy network; every
            allowed service when omitted. A feasible plan is also walked car
            by car and its chains and loads are reported under `plan`
        out: Directory for paths.csv

    Returns:
        Dictionary with `success` and `document`, or `error` and `type`
    """
    try:
        inst = resolve_instance(ref)
        cache = get_path_cache(inst)
        document: Dict[str, Any] = {
            "yards": list(inst.yard_ids),
            "links": len(inst.links),
            "shipments": {f"{i}->{j}": inst.volume((i, j)) for i, j in inst.shipment_pairs},
            "candidate_yards": {
                f"{i}->{j}": list(cache.candidates(i, j)) for i, j in inst.shipment_pairs
            },
        }
        tables = {}
        if paths:
            path_sets = [cache.path_set(i, j) for i, j in cache.service_pairs()]
            document["paths"] = {
                f"{ps.pair[0]}->{ps.pair[1]}": [
                    {"rank": r, "yards": p.label(), "length": p.total_length,
                     "extra_length": ps.extra_lengths[r]}
                    for r, p in enumerate(ps.paths)
                ]
                for ps in path_sets
            }
            tables["paths"] = paths_table(path_sets)
        plan = load_plan(inst, plan_path) if plan_path else None
        if plan is not None:
            document["plan"] = _plan_section(inst, plan, cache)
        if strategies:
            i, j = strategies
            services = plan.y if plan is not None else list(cache.service_pairs())
            chains = enumerate_strategies(inst, services, i, j, cache)
            document["strategies"] = {
                "pair": f"{i}->{j}",
                "count": len(chains),
                "chains": ["-".join(chain_yards(ch)) for ch in chains],
            }
        written = write_tables(resolve_output_dir(out), tables) if tables else []
        return {"success": True, "document": document, "tables": written}
    except (TFPError, FileNotFoundError, ValueError) as e:
        logger.warning("report failed: %s", e)
        return {
            "success": False,
            "error": str(e),
            "type": type(e).__name__,
        }


def _plan_section(inst: Instance, plan: Plan, cache: PathCache) -> Dict[str, Any]:
    violations = check_structural_feasibility(inst, plan, cache)
    if violations:
        return {"feasible": False, "violations": [str(v) for v in violations]}
    cars = simulate_cars(inst, plan, cache)
    return {
        "feasible": True,
        "chains": {
            f"{i}->{j}": "-".join(chain_yards(strategy_chain(inst, plan, i, j)))
            for i, j in inst.shipment_pairs
        },
        "service_loads": {f"{i}->{j}": load for (i, j), load in sorted(cars.D.items())},
        "yard_reclass": dict(sorted(cars.yard_reclass.items())),
    }

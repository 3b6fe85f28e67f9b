"""Solver handler: run the exact or annealing solver and export the plan."""

import logging
from typing import Any, Dict, Optional

from ..cache import get_path_cache
from ..elastic import penalties
from ..errors import TFPError
from ..instance import resolve_instance
from ..solvers import ExactLimits, default_sa_config, load_sa_config, solve_exact, solve_sa
from .exports import plan_tables, resolve_output_dir, write_tables

logger = logging.getLogger(__name__)

SOLVERS = ("exact", "sa")


def solve_instance(
    ref: str,
    solver: str = "sa",
    seed: Optional[int] = None,
    chains: Optional[int] = None,
    max_moves: Optional[int] = None,
    config: Optional[str] = None,
    rigid: bool = False,
    out: Optional[str] = None,
) -> Dict[str, Any]:
    """
    Solve an instance and return the Solution document.

    Args:
        ref: Instance path or `@fixture`
        solver: `exact` or `sa`
        seed: Base seed of the annealing chains
        chains: Number of independent annealing chains
        max_moves: Move budget per chain
        config: YAML/JSON file with SAConfig fields
        rigid: Rigid-as-degenerate-belt mode
        out: Directory for services/chains/loads/degrees CSV tables

    Returns:
        Dictionary with `success` and `document`, or `error` and `type`
    """
    try:
        if solver not in SOLVERS:
            raise ValueError(f"unknown solver '{solver}'; choose from {', '.join(SOLVERS)}")
        inst = resolve_instance(ref)
        cache = get_path_cache(inst)

        if solver == "exact":
            solution = solve_exact(inst, ExactLimits.from_settings(), rigid=rigid, cache=cache)
        else:
            overrides = {"seed": seed, "chains": chains, "max_moves": max_moves}
            cfg = load_sa_config(config, **overrides) if config else default_sa_config(**overrides)
            solution = solve_sa(inst, cfg, rigid=rigid, cache=cache)

        penalty_inst = inst.rigidified() if rigid else inst
        _, _, _, profile = penalties(penalty_inst, solution.plan, solution.flow)
        written = write_tables(
            resolve_output_dir(out),
            plan_tables(inst, solution.plan, solution.flow, profile, cache),
        )
        return {"success": True, "document": solution.to_document(inst), "tables": written}
    except (TFPError, FileNotFoundError, ValueError) as e:
        logger.warning("solve failed: %s", e)
        return {
            "success": False,
            "error": str(e),
            "type": type(e).__name__,
        }

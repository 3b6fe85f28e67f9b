"""Evaluation handler: cost and capacity satisfaction of a fixed plan."""

import logging
from typing import Any, Dict, Optional

from ..cache import get_path_cache
from ..elastic import evaluate
from ..errors import TFPError
from ..flow import chain_yards, load_plan, strategy_chain
from ..instance import resolve_instance
from .exports import plan_tables, resolve_output_dir, write_tables

logger = logging.getLogger(__name__)


def evaluate_plan_file(
    ref: str, plan_path: str, rigid: bool = False, out: Optional[str] = None
) -> Dict[str, Any]:
    """
    Evaluate a plan document against an instance.

    Returns:
        Dictionary with `success` and `document` (cost breakdown, degrees,
        loads and, in rigid mode, rigid violations), or `error` and `type`
    """
    try:
        inst = resolve_instance(ref)
        cache = get_path_cache(inst)
        plan = load_plan(inst, plan_path)
        result = evaluate(inst, plan, rigid=rigid, cache=cache)
        fs = result.flow
        document: Dict[str, Any] = {
            "mode": "rigid" if rigid else "elastic",
            "cost": result.cost.to_dict(),
            "degrees": result.profile.to_dict(),
            "loads": {
                "yard_reclass": dict(sorted(fs.yard_reclass.items())),
                "yard_tracks": dict(sorted(fs.yard_tracks.items())),
                "link_trains": dict(sorted(fs.link_trains.items())),
            },
            "chains": {
                f"{i}->{j}": chain_yards(strategy_chain(inst, plan, i, j))
                for i, j in inst.shipment_pairs
            },
        }
        if rigid:
            document["rigid_violations"] = [v.to_dict() for v in result.rigid_violations]
        written = write_tables(
            resolve_output_dir(out), plan_tables(inst, plan, fs, result.profile, cache)
        )
        return {"success": True, "document": document, "tables": written}
    except (TFPError, FileNotFoundError, ValueError) as e:
        logger.warning("evaluate failed: %s", e)
        return {
            "success": False,
            "error": str(e),
            "type": type(e).__name__,
        }

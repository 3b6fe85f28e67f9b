"""Stress handler: Monte Carlo daily fluctuation against a fixed plan."""

import logging
from typing import Any, Dict, Optional

from ..cache import get_path_cache
from ..errors import TFPError
from ..flow import load_plan
from ..instance import resolve_instance
from ..stress import load_stress_spec, stress
from .exports import resolve_output_dir, stress_days_table, write_tables

logger = logging.getLogger(__name__)


def stress_plan_file(
    ref: str,
    plan_path: str,
    spec_path: str,
    days: Optional[int] = None,
    seed: Optional[int] = None,
    out: Optional[str] = None,
) -> Dict[str, Any]:
    """
    Run a stress specification against a plan.

    Args:
        ref: Instance path or `@fixture`
        plan_path: Plan document
        spec_path: Stress specification document
        days: Overrides the spec's day count
        seed: Overrides the spec's seed
        out: Directory for stress_days.csv

    Returns:
        Dictionary with `success` and `document`, or `error` and `type`
    """
    try:
        inst = resolve_instance(ref)
        cache = get_path_cache(inst)
        plan = load_plan(inst, plan_path)
        spec = load_stress_spec(spec_path, days=days, seed=seed)
        report = stress(inst, plan, spec, cache=cache)
        written = write_tables(resolve_output_dir(out), {"stress_days": stress_days_table(report)})
        return {"success": True, "document": report.to_document(), "tables": written}
    except (TFPError, FileNotFoundError, ValueError) as e:
        logger.warning("stress failed: %s", e)
        return {
            "success": False,
            "error": str(e),
            "type": type(e).__name__,
        }

"""Solver result shared by the exact and annealing solvers."""

from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

from ..elastic import CostBreakdown, rigid_check, score
from ..flow import FlowState, Plan, Violation, chain_yards, require_feasible, strategy_chain
from ..instance import Instance


@dataclass(frozen=True)
class Solution:
    plan: Plan
    cost: CostBreakdown
    solver_id: str
    seed: Optional[int] = None
    iterations: int = 0
    # Seconds; logged only, never written into documents
    wall_time: float = 0.0
    flow: Optional[FlowState] = None
    rigid: bool = False
    rigid_violations: Tuple[Violation, ...] = field(default_factory=tuple)

    def chains(self, inst: Instance) -> Dict[str, Any]:
        """Yard sequence of every shipment's strategy chain."""
        out = {}
        for i, j in inst.shipment_pairs:
            out[f"{i}->{j}"] = chain_yards(strategy_chain(inst, self.plan, i, j))
        return out

    def to_document(self, inst: Instance) -> Dict[str, Any]:
        """Byte-stable summary: plan, cost, strategy chains and loads."""
        doc: Dict[str, Any] = {
            "solver": self.solver_id,
            "seed": self.seed,
            "iterations": self.iterations,
            "mode": "rigid" if self.rigid else "elastic",
            "plan": self.plan.to_document(),
            "cost": self.cost.to_dict(),
            "chains": self.chains(inst),
        }
        if self.flow is not None:
            doc["loads"] = {
                "yard_reclass": dict(sorted(self.flow.yard_reclass.items())),
                "yard_tracks": dict(sorted(self.flow.yard_tracks.items())),
                "link_trains": dict(sorted(self.flow.link_trains.items())),
            }
        if self.rigid:
            doc["rigid_violations"] = [v.to_dict() for v in self.rigid_violations]
        return doc


def build_solution(
    inst: Instance,
    plan: Plan,
    solver_id: str,
    cache=None,
    rigid: bool = False,
    seed: Optional[int] = None,
    iterations: int = 0,
    wall_time: float = 0.0,
) -> Solution:
    """
    Recompute cost and loads of a final plan from scratch.

    Raises:
        StructuralInfeasibilityError: If the plan breaks a structural rule
    """
    require_feasible(inst, plan, cache)
    result = score(inst, plan, cache, penalty_inst=inst.rigidified() if rigid else None)
    violations = tuple(rigid_check(inst, plan, result.flow)) if rigid else ()
    return Solution(
        plan=plan,
        cost=result.cost,
        solver_id=solver_id,
        seed=seed,
        iterations=iterations,
        wall_time=wall_time,
        flow=result.flow,
        rigid=rigid,
        rigid_violations=violations,
    )

"""tfp-elastic: train formation plan and traffic routing with elastic capacities.

Solver library and CLI for the integrated train formation plan and traffic
routing problem in which yard reclassification, yard tracks and link train
capacities are capacity belts penalized through membership degrees.
"""

__version__ = "1.0.0"

from .elastic import CostBreakdown, SatisfactionProfile, evaluate, membership, total_cost
from .flow import FlowState, Plan, check_structural_feasibility, propagate_flows
from .instance import (
    CapacityBelt,
    Instance,
    canonical_instances,
    parse_instance,
    serialize_instance,
    validate_instance,
)

__all__ = [
    "__version__",
    "CapacityBelt",
    "Instance",
    "canonical_instances",
    "parse_instance",
    "serialize_instance",
    "validate_instance",
    "FlowState",
    "Plan",
    "check_structural_feasibility",
    "propagate_flows",
    "CostBreakdown",
    "SatisfactionProfile",
    "evaluate",
    "membership",
    "total_cost",
]

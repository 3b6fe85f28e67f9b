"""Operating cost, rigid capacity checks and elastic capacity penalties."""

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Tuple

from .cache import PathCache, get_path_cache
from .flow import FlowState, Plan, Violation, propagate_flows, require_feasible
from .instance import CapacityBelt, Instance

logger = logging.getLogger(__name__)

_TOL = 1e-9


def membership(load: float, belt: CapacityBelt) -> float:
    """
    Satisfaction degree of `load` against a capacity belt.

    1 up to the lower bound, linear down to 0 at the upper bound, 0 beyond.
    A degenerate belt (lower == upper) is a step: 1 if load <= lower else 0.

    Example:
        >>> membership(350, CapacityBelt(300, 400))
        0.5
    """
    if load <= belt.lower:
        return 1.0
    if load > belt.upper or belt.upper == belt.lower:
        return 0.0
    return (belt.upper - load) / (belt.upper - belt.lower)


@dataclass(frozen=True)
class CostBreakdown:
    accumulation: float = 0.0
    reclassification: float = 0.0
    detour: float = 0.0
    G: float = 0.0
    H: float = 0.0
    M: float = 0.0

    @property
    def Z(self) -> float:
        return self.accumulation + self.reclassification + self.detour

    @property
    def penalty(self) -> float:
        return self.G + self.H + self.M

    @property
    def total(self) -> float:
        return self.Z + self.G + self.H + self.M

    def to_dict(self) -> Dict[str, float]:
        return {
            "G": self.G,
            "H": self.H,
            "M": self.M,
            "Z": self.Z,
            "accumulation": self.accumulation,
            "detour": self.detour,
            "reclassification": self.reclassification,
            "total": self.total,
        }


@dataclass(frozen=True)
class SatisfactionProfile:
    """Membership degrees per yard (reclassification, tracks) and per link."""

    reclass: Dict[str, float] = field(default_factory=dict)
    tracks: Dict[str, float] = field(default_factory=dict)
    links: Dict[str, float] = field(default_factory=dict)

    def resources(self) -> Iterator[Tuple[str, str, float]]:
        """(kind, id, degree) for every resource in a fixed order."""
        for kind, degrees in (("yard_reclass", self.reclass), ("yard_tracks", self.tracks), ("link", self.links)):
            for key in sorted(degrees):
                yield kind, key, degrees[key]

    def to_dict(self) -> Dict[str, Dict[str, float]]:
        return {
            "link": dict(sorted(self.links.items())),
            "yard_reclass": dict(sorted(self.reclass.items())),
            "yard_tracks": dict(sorted(self.tracks.items())),
        }


def operating_cost(
    inst: Instance, plan: Plan, fs: FlowState, cache: Optional[PathCache] = None
) -> CostBreakdown:
    """
    Z terms of the objective for a plan and its flow state.

    Args:
        inst: Problem instance
        plan: Structurally feasible plan
        fs: propagate_flows(inst, plan)
        cache: PathCache supplying detour lengths

    Returns:
        CostBreakdown: accumulation, reclassification and detour (penalties 0)
    """
    cache = cache or get_path_cache(inst)
    accumulation = 0.0
    detour = 0.0
    for pair in plan.services:
        accumulation += inst.yard_by_id[pair[0]].c * inst.train_size(pair)
        extra = cache.path_set(*pair).extra_lengths[plan.rank.get(pair, 0)]
        if extra > 0:
            detour += fs.service_load(pair) * extra
    reclassification = sum(
        inst.yard_by_id[k].tau * load for k, load in fs.yard_reclass.items() if load > 0
    )
    return CostBreakdown(
        accumulation=accumulation,
        reclassification=reclassification,
        detour=inst.params.lam * detour,
    )


def rigid_check(inst: Instance, plan: Plan, fs: FlowState) -> List[Violation]:
    """Resources whose load exceeds the rigid bound read from the belt lower end."""
    out: List[Violation] = []
    for y in inst.yards:
        load = fs.yard_reclass.get(y.id, 0.0)
        bound = y.theta * y.reclass_belt.lower
        if load > bound + _TOL:
            out.append(Violation("rigid_reclass", y.id, f"{load:g} cars > {bound:g}"))
        tracks = fs.yard_tracks.get(y.id, 0.0)
        if tracks > y.track_belt.lower + _TOL:
            out.append(Violation("rigid_tracks", y.id, f"{tracks:g} tracks > {y.track_belt.lower:g}"))
    for lk in inst.links:
        trains = fs.link_trains.get(lk.id, 0.0)
        bound = lk.beta_n * lk.capacity_belt.lower
        if trains > bound + _TOL:
            out.append(Violation("rigid_link", lk.id, f"{trains:g} trains > {bound:g}"))
    return out


def _penalty(alpha: float, beta: float, load: float, belt: CapacityBelt) -> Tuple[float, float]:
    degree = membership(load, belt)
    return degree, alpha * (1.0 - degree) + beta * max(0.0, load - belt.upper)


def penalties(
    inst: Instance, plan: Plan, fs: FlowState
) -> Tuple[float, float, float, SatisfactionProfile]:
    """
    Elastic capacity penalties.

    G covers yard reclassification, H yard tracks and M link trains; each is
    alpha * sum(1 - degree) + beta * sum(max(0, load - upper)).

    Returns:
        tuple: (G, H, M, SatisfactionProfile)
    """
    alpha, beta = inst.params.alpha, inst.params.beta
    G = H = M = 0.0
    reclass: Dict[str, float] = {}
    tracks: Dict[str, float] = {}
    links: Dict[str, float] = {}
    for y in inst.yards:
        reclass[y.id], p = _penalty(alpha, beta, fs.yard_reclass.get(y.id, 0.0), y.reclass_belt)
        G += p
        tracks[y.id], p = _penalty(alpha, beta, fs.yard_tracks.get(y.id, 0.0), y.track_belt)
        H += p
    for lk in inst.links:
        links[lk.id], p = _penalty(alpha, beta, fs.link_trains.get(lk.id, 0.0), lk.capacity_belt)
        M += p
    return G, H, M, SatisfactionProfile(reclass=reclass, tracks=tracks, links=links)


@dataclass(frozen=True)
class Evaluation:
    flow: FlowState
    cost: CostBreakdown
    profile: SatisfactionProfile
    rigid_violations: Tuple[Violation, ...] = ()


def score(
    inst: Instance,
    plan: Plan,
    cache: Optional[PathCache] = None,
    penalty_inst: Optional[Instance] = None,
    fractional: Optional[bool] = None,
) -> Evaluation:
    """
    Cost a plan without the structural check (search hot path).

    `penalty_inst` supplies the belts the penalties are measured against;
    solvers pass the rigidified instance in rigid mode.
    """
    cache = cache or get_path_cache(inst)
    fs = propagate_flows(inst, plan, cache, fractional)
    z = operating_cost(inst, plan, fs, cache)
    G, H, M, profile = penalties(penalty_inst or inst, plan, fs)
    cost = CostBreakdown(z.accumulation, z.reclassification, z.detour, G, H, M)
    return Evaluation(flow=fs, cost=cost, profile=profile)


def total_cost(inst: Instance, plan: Plan, cache: Optional[PathCache] = None) -> CostBreakdown:
    """
    Search objective Z + G + H + M.

    Raises:
        StructuralInfeasibilityError: If the plan breaks a structural rule
    """
    cache = cache or get_path_cache(inst)
    require_feasible(inst, plan, cache)
    return score(inst, plan, cache).cost


def evaluate(
    inst: Instance, plan: Plan, rigid: bool = False, cache: Optional[PathCache] = None
) -> Evaluation:
    """
    Full evaluation of a fixed plan.

    Args:
        inst: Problem instance
        plan: Plan to evaluate
        rigid: Measure penalties against the rigid bounds and list every
            rigid capacity violation
        cache: PathCache of `inst`

    Returns:
        Evaluation: flow state, cost breakdown, satisfaction profile and,
        in rigid mode, the rigid violations

    Raises:
        StructuralInfeasibilityError: If the plan breaks a structural rule
    """
    cache = cache or get_path_cache(inst)
    require_feasible(inst, plan, cache)
    result = score(inst, plan, cache, penalty_inst=inst.rigidified() if rigid else None)
    if not rigid:
        return result
    violations = tuple(rigid_check(inst, plan, result.flow))
    if violations:
        logger.info("plan exceeds %d rigid capacity bound(s)", len(violations))
    return Evaluation(result.flow, result.cost, result.profile, violations)

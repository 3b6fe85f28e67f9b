"""Decision variables, structural feasibility and flow propagation.

A Plan fixes which train services run (y), where each commodity is first
reclassified (x) and which candidate path each service uses (xi). A
commodity (i, j) is a shipment pair or any (k, j) reached through a
deferral x(i, j) = k; every commodity is either carried directly on service
(i, j) or handed to exactly one reclassification yard.
"""

import json
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path as FsPath
from typing import Any, Dict, FrozenSet, Iterable, List, Mapping, Optional, Set, Tuple, Union

import networkx as nx
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from .cache import PathCache, get_path_cache
from .config import get_settings
from .errors import CyclicPlanError, PlanDocumentError, StructuralInfeasibilityError
from .instance import Instance, Pair

logger = logging.getLogger(__name__)


# =============================================================================
# Plan
# =============================================================================

@dataclass(frozen=True)
class Plan:
    """One assignment of y, x and xi; build instances with Plan.build()."""

    y: FrozenSet[Pair]
    x: Tuple[Tuple[Pair, str], ...] = ()
    xi: Tuple[Tuple[Pair, int], ...] = ()

    @classmethod
    def build(
        cls,
        y: Iterable[Pair],
        x: Optional[Mapping[Pair, str]] = None,
        xi: Optional[Mapping[Pair, int]] = None,
    ) -> "Plan":
        return cls(
            y=frozenset(tuple(p) for p in y),
            x=tuple(sorted((tuple(p), k) for p, k in (x or {}).items())),
            xi=tuple(sorted((tuple(p), int(r)) for p, r in (xi or {}).items())),
        )

    @cached_property
    def via(self) -> Dict[Pair, str]:
        return dict(self.x)

    @cached_property
    def rank(self) -> Dict[Pair, int]:
        return dict(self.xi)

    @cached_property
    def services(self) -> Tuple[Pair, ...]:
        return tuple(sorted(self.y))

    def provides(self, pair: Pair) -> bool:
        return pair in self.y

    def encode(self) -> Tuple[Any, ...]:
        """Lexicographic plan key used for deterministic tie-breaks."""
        return (self.services, self.x, self.xi)

    def to_document(self) -> Dict[str, Any]:
        return {
            "y": [list(p) for p in self.services],
            "x": [{"pair": list(p), "via": k} for p, k in self.x],
            "xi": [{"pair": list(p), "rank": r} for p, r in self.xi],
        }


def commodity_pairs(inst: Instance, plan: Plan) -> Tuple[Pair, ...]:
    """Shipment pairs plus every (k, j) reached by following deferrals."""
    seen: Set[Pair] = set()
    stack = list(inst.shipment_pairs)
    while stack:
        pair = stack.pop()
        if pair in seen:
            continue
        seen.add(pair)
        k = plan.via.get(pair)
        if k is not None and k != pair[1]:
            stack.append((k, pair[1]))
    return tuple(sorted(seen))


# =============================================================================
# Structural feasibility
# =============================================================================

@dataclass(frozen=True)
class Violation:
    """One broken structural or capacity rule."""

    constraint: str
    subject: str
    message: str

    def __str__(self) -> str:
        return f"{self.constraint} {self.subject}: {self.message}"

    def to_dict(self) -> Dict[str, str]:
        return {"constraint": self.constraint, "subject": self.subject, "message": self.message}


def _fmt(pair: Pair) -> str:
    return f"{pair[0]}->{pair[1]}"


def _deferral_graphs(plan: Plan) -> Dict[str, nx.DiGraph]:
    """Per destination j, the relation i -> k for every x(i, j) = k."""
    graphs: Dict[str, nx.DiGraph] = {}
    for (i, j), k in plan.x:
        graphs.setdefault(j, nx.DiGraph()).add_edge(i, k)
    return graphs


def _cycle_violations(plan: Plan) -> List[Violation]:
    out = []
    for j, g in sorted(_deferral_graphs(plan).items()):
        if nx.is_directed_acyclic_graph(g):
            continue
        cycle = [u for u, _ in nx.find_cycle(g)]
        out.append(
            Violation(
                "acyclicity",
                f"->{j}",
                f"deferral cycle {'->'.join(cycle + cycle[:1])} toward {j}",
            )
        )
    return out


def check_structural_feasibility(
    inst: Instance, plan: Plan, cache: Optional[PathCache] = None
) -> List[Violation]:
    """
    List every structural rule the plan breaks.

    Checks the commodity partition, service support for each reclassification,
    path selection, mandated and forbidden services, mandated paths, the
    candidate yard rule and acyclicity of the deferral relation.

    Args:
        inst: Problem instance
        plan: Plan to check
        cache: PathCache of `inst` (looked up when omitted)

    Returns:
        list[Violation]: empty iff the plan is structurally feasible
    """
    cache = cache or get_path_cache(inst)
    out: List[Violation] = []
    known = inst.yard_by_id

    referenced = set(plan.y) | set(plan.via) | set(plan.rank)
    bad = sorted(p for p in referenced if p[0] not in known or p[1] not in known)
    for pair in bad:
        out.append(Violation("reference", _fmt(pair), "unknown yard"))
    bad_via = sorted(p for p, k in plan.x if k not in known)
    for pair in bad_via:
        out.append(Violation("reference", _fmt(pair), f"unknown yard '{plan.via[pair]}'"))
    if out:
        return out

    for pair in sorted(inst.mandated_services - plan.y):
        out.append(Violation("mandate", _fmt(pair), "mandated service not provided"))
    for pair in sorted(plan.y & inst.forbidden_services):
        out.append(Violation("forbidden", _fmt(pair), "forbidden service provided"))

    for pair in plan.services:
        if pair[0] == pair[1]:
            out.append(Violation("path", _fmt(pair), "service from a yard to itself"))
            continue
        if not cache.reachable(*pair):
            out.append(Violation("path", _fmt(pair), "no physical path for service"))
            continue
        rank = plan.rank.get(pair)
        size = len(cache.path_set(*pair))
        if rank is None:
            out.append(Violation("path", _fmt(pair), "provided service has no path selected"))
        elif not 0 <= rank < size:
            out.append(Violation("path", _fmt(pair), f"path rank {rank} outside 0..{size - 1}"))
        else:
            mandated = cache.mandated_rank(pair)
            if mandated is not None and rank != mandated:
                out.append(
                    Violation("mandated_path", _fmt(pair), f"rank {rank} chosen, {mandated} mandated")
                )
    for pair in sorted(set(plan.rank) - plan.y):
        out.append(Violation("path", _fmt(pair), "path selected for a service not provided"))

    commodities = set(commodity_pairs(inst, plan))
    for pair in sorted(commodities):
        direct = pair in plan.y
        k = plan.via.get(pair)
        if direct and k is not None:
            out.append(Violation("partition", _fmt(pair), f"carried directly and via {k}"))
        elif not direct and k is None:
            out.append(Violation("partition", _fmt(pair), "neither carried directly nor reclassified"))

    for pair, k in plan.x:
        if pair not in commodities:
            out.append(Violation("partition", _fmt(pair), "reclassification set for a pair carrying no commodity"))
            continue
        if k not in cache.candidates(*pair):
            out.append(Violation("candidate", _fmt(pair), f"{k} is not a candidate reclassification yard"))
        if (pair[0], k) not in plan.y:
            out.append(Violation("support", _fmt(pair), f"first leg {pair[0]}->{k} not provided"))

    out.extend(_cycle_violations(plan))
    return out


def require_feasible(inst: Instance, plan: Plan, cache: Optional[PathCache] = None) -> None:
    """Raise StructuralInfeasibilityError unless the plan passes every check."""
    violations = check_structural_feasibility(inst, plan, cache)
    if violations:
        if any(v.constraint == "acyclicity" for v in violations):
            raise CyclicPlanError(violations)
        raise StructuralInfeasibilityError(violations)


# =============================================================================
# Flow propagation
# =============================================================================

@dataclass(frozen=True)
class FlowState:
    """Quantities derived from a plan; never mutated after construction."""

    f: Dict[Pair, float] = field(default_factory=dict)
    D: Dict[Pair, float] = field(default_factory=dict)
    yard_reclass: Dict[str, float] = field(default_factory=dict)
    yard_tracks: Dict[str, float] = field(default_factory=dict)
    link_trains: Dict[str, float] = field(default_factory=dict)

    def service_load(self, pair: Pair) -> float:
        return self.D.get(pair, 0.0)


def track_demand(load: float, cars_per_track: float) -> float:
    """phi: an open block occupies at least one track's worth of cars."""
    if load <= 0:
        return 0.0
    return max(load, cars_per_track)


def trains_for(load: float, train_size: float, fractional: bool = False) -> float:
    if load <= 0:
        return 0.0
    if fractional:
        return load / train_size
    return float(math.ceil(round(load / train_size, 9)))


def _resource_loads(
    inst: Instance,
    plan: Plan,
    D: Mapping[Pair, float],
    cache: PathCache,
    fractional: bool,
) -> Tuple[Dict[str, float], Dict[str, float]]:
    a = inst.params.cars_per_track
    tracks = {k: 0.0 for k in inst.yard_ids}
    trains = {lk.id: 0.0 for lk in inst.links}
    for pair in plan.services:
        load = D.get(pair, 0.0)
        tracks[pair[0]] += track_demand(load, a) / a
        n_trains = trains_for(load, inst.train_size(pair), fractional)
        if n_trains == 0:
            continue
        path = cache.path_set(*pair)[plan.rank.get(pair, 0)]
        for link_id in path.links:
            trains[link_id] += n_trains
    return tracks, trains


def propagate_flows(
    inst: Instance,
    plan: Plan,
    cache: Optional[PathCache] = None,
    fractional: Optional[bool] = None,
) -> FlowState:
    """
    Push shipment volumes through the plan.

    f(i, j) is the commodity volume at i bound for j (its own shipment plus
    everything deferred to i), D(i, j) the cars riding service (i, j).
    yard_reclass(k) sums f(i, j) over every commodity with x(i, j) = k, so a
    car is sorted once at each intermediate yard of its chain.

    Args:
        inst: Problem instance (volumes are read from here)
        plan: Structurally feasible plan
        cache: PathCache for routing lookups; `inst`'s own when omitted
        fractional: Use D/m instead of whole trains; the
            TFP_FRACTIONAL_TRAINS setting when None

    Returns:
        FlowState: f, D, yard_reclass, yard_tracks and link_trains

    Raises:
        CyclicPlanError: If the deferral relation contains a cycle
    """
    cache = cache or get_path_cache(inst)
    if fractional is None:
        fractional = get_settings().fractional_trains

    cycles = _cycle_violations(plan)
    if cycles:
        raise CyclicPlanError(cycles)

    graphs = _deferral_graphs(plan)
    f: Dict[Pair, float] = {}
    for pair in commodity_pairs(inst, plan):
        f[pair] = inst.volume(pair)
    destinations = sorted({j for _, j in f})
    for j in destinations:
        g = graphs.get(j)
        if g is None:
            continue
        for u in nx.topological_sort(g):
            k = plan.via.get((u, j))
            if k is not None and (u, j) in f:
                f[(k, j)] = f.get((k, j), 0.0) + f[(u, j)]

    D: Dict[Pair, float] = {pair: 0.0 for pair in plan.services}
    reclass = {k: 0.0 for k in inst.yard_ids}
    for pair, volume in f.items():
        k = plan.via.get(pair)
        if k is None:
            if pair in D:
                D[pair] += volume
            continue
        D[(pair[0], k)] = D.get((pair[0], k), 0.0) + volume
        reclass[k] += volume

    tracks, trains = _resource_loads(inst, plan, D, cache, fractional)
    return FlowState(f=f, D=D, yard_reclass=reclass, yard_tracks=tracks, link_trains=trains)


def simulate_cars(
    inst: Instance,
    plan: Plan,
    cache: Optional[PathCache] = None,
    fractional: Optional[bool] = None,
) -> FlowState:
    """Car-by-car oracle: walk every shipment along its strategy chain."""
    cache = cache or get_path_cache(inst)
    if fractional is None:
        fractional = get_settings().fractional_trains

    f: Dict[Pair, float] = {}
    D: Dict[Pair, float] = {pair: 0.0 for pair in plan.services}
    reclass = {k: 0.0 for k in inst.yard_ids}
    for s in inst.shipments:
        chain = strategy_chain(inst, plan, s.origin, s.destination)
        for u, v in chain:
            f[(u, s.destination)] = f.get((u, s.destination), 0.0) + s.volume
            D[(u, v)] = D.get((u, v), 0.0) + s.volume
            if v != s.destination:
                reclass[v] += s.volume

    tracks, trains = _resource_loads(inst, plan, D, cache, fractional)
    return FlowState(f=f, D=D, yard_reclass=reclass, yard_tracks=tracks, link_trains=trains)


# =============================================================================
# Strategies
# =============================================================================

def strategy_chain(inst: Instance, plan: Plan, i: str, j: str) -> List[Pair]:
    """
    Services shipment (i, j) rides, in order.

    Raises:
        CyclicPlanError: If the deferrals of destination j loop
        StructuralInfeasibilityError: If a commodity on the way is not carried
    """
    chain: List[Pair] = []
    cur = i
    visited = {i}
    while True:
        k = plan.via.get((cur, j))
        if k is None:
            if (cur, j) not in plan.y:
                raise StructuralInfeasibilityError(
                    [Violation("partition", _fmt((cur, j)), "commodity not carried")]
                )
            chain.append((cur, j))
            return chain
        chain.append((cur, k))
        if k in visited:
            raise CyclicPlanError(
                [Violation("acyclicity", f"->{j}", f"chain of {_fmt((i, j))} revisits {k}")]
            )
        visited.add(k)
        cur = k


def enumerate_strategies(
    inst: Instance,
    services: Iterable[Pair],
    i: str,
    j: str,
    cache: Optional[PathCache] = None,
) -> List[List[Pair]]:
    """
    Every acyclic strategy chain from i to j over the given services.

    Each step i' -> k must use a service in `services` with k a candidate
    reclassification yard of (i', j); chains never revisit a yard.

    Returns:
        list: chains in deterministic (yard sequence) order
    """
    cache = cache or get_path_cache(inst)
    provided = frozenset(tuple(p) for p in services)
    chains: List[List[Pair]] = []

    def walk(cur: str, prefix: List[Pair], visited: FrozenSet[str]) -> None:
        if (cur, j) in provided:
            chains.append(prefix + [(cur, j)])
        for k in cache.candidates(cur, j):
            if k in visited or (cur, k) not in provided:
                continue
            walk(k, prefix + [(cur, k)], visited | {k})

    walk(i, [], frozenset({i}))
    chains.sort(key=lambda ch: [u for u, _ in ch] + [j])
    return chains


def count_strategies(
    inst: Instance,
    services: Iterable[Pair],
    i: str,
    j: str,
    cache: Optional[PathCache] = None,
) -> int:
    """Number of distinct acyclic strategy chains from i to j."""
    return len(enumerate_strategies(inst, services, i, j, cache))


def chain_yards(chain: List[Pair]) -> List[str]:
    return [u for u, _ in chain] + [chain[-1][1]] if chain else []


# =============================================================================
# Normalization
# =============================================================================

def derive_services(inst: Instance, x: Mapping[Pair, str], commodities: Iterable[Pair]) -> Set[Pair]:
    """y = mandated services, direct commodities and first legs of deferrals."""
    y = set(inst.mandated_services)
    for pair in commodities:
        k = x.get(pair)
        y.add(pair if k is None else (pair[0], k))
    return y


def normalize_plan(inst: Instance, plan: Plan, cache: Optional[PathCache] = None) -> Plan:
    """
    Canonical form of a plan after a local edit.

    Decisions for commodities no longer reachable from a shipment are
    dropped, y is rebuilt from the remaining decisions and the mandates,
    surviving services keep their path rank and new ones start on the
    mandated path or the shortest one.
    """
    cache = cache or get_path_cache(inst)
    commodities = commodity_pairs(inst, plan)
    x = {pair: plan.via[pair] for pair in commodities if pair in plan.via}
    y = derive_services(inst, x, commodities)
    xi = {}
    for pair in y:
        mandated = cache.mandated_rank(pair) if cache.reachable(*pair) else None
        if mandated is not None:
            xi[pair] = mandated
            continue
        rank = plan.rank.get(pair)
        if rank is not None and cache.reachable(*pair) and 0 <= rank < len(cache.path_set(*pair)):
            xi[pair] = rank
        else:
            xi[pair] = 0
    return Plan.build(y, x, xi)


# =============================================================================
# Plan documents
# =============================================================================

class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ViaDoc(_Strict):
    pair: Tuple[str, str]
    via: str


class RankDoc(_Strict):
    pair: Tuple[str, str]
    rank: int = Field(..., ge=0)


class PlanDocument(_Strict):
    y: List[Tuple[str, str]]
    x: List[ViaDoc] = Field(default_factory=list)
    xi: List[RankDoc] = Field(default_factory=list)


def plan_from_document(
    inst: Instance, data: Union[str, bytes, Mapping[str, Any]], cache: Optional[PathCache] = None
) -> Plan:
    """
    Build a Plan from a plan document.

    Provided services missing from `xi` get the mandated rank, or 0.

    Raises:
        PlanDocumentError: If the document is malformed or names unknown yards
    """
    try:
        raw = json.loads(data) if isinstance(data, (str, bytes)) else dict(data)
        doc = PlanDocument.model_validate(raw)
    except (json.JSONDecodeError, ValidationError) as exc:
        raise PlanDocumentError(f"plan document is malformed: {exc}") from exc

    names = set(doc.y) | {tuple(v.pair) for v in doc.x} | {tuple(r.pair) for r in doc.xi}
    unknown = sorted(
        {y for pair in names for y in pair} | {v.via for v in doc.x}
    )
    unknown = [y for y in unknown if y not in inst.yard_by_id]
    if unknown:
        raise PlanDocumentError(f"plan document refers to unknown yard(s): {', '.join(unknown)}")

    cache = cache or get_path_cache(inst)
    x = {tuple(v.pair): v.via for v in doc.x}
    xi = {tuple(r.pair): r.rank for r in doc.xi}
    for pair in doc.y:
        pair = tuple(pair)
        if pair not in xi:
            mandated = cache.mandated_rank(pair) if cache.reachable(*pair) else None
            xi[pair] = 0 if mandated is None else mandated
    return Plan.build(doc.y, x, xi)


def load_plan(inst: Instance, path: Union[str, FsPath]) -> Plan:
    path = FsPath(path)
    if not path.exists():
        raise PlanDocumentError(f"plan file not found at {path}")
    return plan_from_document(inst, path.read_text(encoding="utf-8"))

"""Initial plans, local moves and repair shared by the solvers."""

import logging
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Set

import numpy as np

from ..cache import PathCache, get_path_cache
from ..elastic import score
from ..errors import InfeasibleInstanceError
from ..flow import Plan, check_structural_feasibility, commodity_pairs, normalize_plan
from ..instance import Instance, Pair

logger = logging.getLogger(__name__)

MAX_ROUTE_OPTIONS = 64
_COST_MEMO_LIMIT = 100_000


class MoveContext:
    """Instance, routing cache and objective shared by one solver run."""

    def __init__(
        self,
        inst: Instance,
        cache: Optional[PathCache] = None,
        rigid: bool = False,
    ):
        self.inst = inst
        self.cache = (cache or get_path_cache(inst)).warm()
        self.rigid = rigid
        self.penalty_inst = inst.rigidified() if rigid else None
        self._memo: Dict[Plan, float] = {}

    def cost(self, plan: Plan) -> float:
        """Objective value of a plan (memoized)."""
        value = self._memo.get(plan)
        if value is None:
            value = score(self.inst, plan, self.cache, self.penalty_inst).cost.total
            if len(self._memo) >= _COST_MEMO_LIMIT:
                self._memo.clear()
            self._memo[plan] = value
        return value

    def allowed(self, pair: Pair, banned: FrozenSet[Pair] = frozenset()) -> bool:
        """Whether service `pair` may be provided."""
        return (
            pair not in banned
            and not self.inst.is_forbidden(pair)
            and self.cache.reachable(*pair)
        )

    def finish(self, x: Mapping[Pair, str], ranks: Mapping[Pair, int]) -> Plan:
        return normalize_plan(self.inst, Plan.build((), x, ranks), self.cache)


def _chain_is_clear(x: Mapping[Pair, str], k: str, j: str, visited: Set[str]) -> bool:
    """Follow existing decisions from k toward j without revisiting a yard."""
    seen = set(visited)
    cur = k
    while (cur, j) in x:
        cur = x[(cur, j)]
        if cur in seen:
            return False
        seen.add(cur)
    return True


def via_options(
    ctx: MoveContext,
    x: Mapping[Pair, str],
    pair: Pair,
    banned: FrozenSet[Pair] = frozenset(),
) -> List[Dict[Pair, str]]:
    """
    Reclassification chains able to carry commodity `pair`.

    Each option holds the new decisions it needs: the first yard of `pair`
    and, for downstream commodities without a decision yet, their own yard.
    Existing decisions are followed, never changed.
    """
    inst, cache = ctx.inst, ctx.cache
    i, j = pair
    options: List[Dict[Pair, str]] = []
    if inst.is_mandated(pair):
        return options

    def walk(cur: str, visited: FrozenSet[str], added: Dict[Pair, str]) -> None:
        for k in cache.candidates(cur, j):
            if len(options) >= MAX_ROUTE_OPTIONS:
                return
            if k in visited or not ctx.allowed((cur, k), banned):
                continue
            step = dict(added)
            step[(cur, j)] = k
            nxt = (k, j)
            if nxt in x:
                if _chain_is_clear(x, k, j, set(visited | {k})):
                    options.append(step)
                continue
            if ctx.allowed(nxt, banned):
                options.append(step)
            if not inst.is_mandated(nxt):
                walk(k, visited | {k}, step)

    walk(i, frozenset({i}), {})
    return options


def cheapest_via(
    ctx: MoveContext,
    x: Mapping[Pair, str],
    ranks: Mapping[Pair, int],
    pair: Pair,
    banned: FrozenSet[Pair] = frozenset(),
) -> Optional[Dict[Pair, str]]:
    """Cheapest option from via_options, two-leg chains first."""
    options = via_options(ctx, x, pair, banned)
    if not options:
        return None
    shortest = min(len(o) for o in options)
    if shortest == 1:
        options = [o for o in options if len(o) == 1]

    def key(option: Dict[Pair, str]):
        merged = dict(x)
        merged.update(option)
        return (round(ctx.cost(ctx.finish(merged, ranks)), 9), sorted(option.items()))

    return min(options, key=key)


def settle(
    ctx: MoveContext,
    x: Dict[Pair, str],
    ranks: Mapping[Pair, int],
    banned: FrozenSet[Pair] = frozenset(),
) -> Optional[Plan]:
    """
    Route every undecided commodity that cannot run direct, then normalize.

    Returns:
        Plan, or None when some commodity has no feasible route
    """
    x = dict(x)
    for _ in range(len(ctx.inst.yard_ids) ** 2 + 1):
        plan = ctx.finish(x, ranks)
        stuck = [
            c for c in commodity_pairs(ctx.inst, plan)
            if c not in plan.via and not ctx.allowed(c, banned)
        ]
        if not stuck:
            return plan
        c = stuck[0]
        option = cheapest_via(ctx, plan.via, ranks, c, banned)
        if option is None:
            return None
        x = dict(plan.via)
        x.update(option)
    return None


def initial_plan(ctx: MoveContext) -> Plan:
    """
    Direct service wherever allowed, otherwise the cheapest chain.

    Raises:
        InfeasibleInstanceError: If some shipment cannot be routed at all
    """
    x: Dict[Pair, str] = {}
    for pair in ctx.inst.shipment_pairs:
        if pair in x or ctx.allowed(pair):
            continue
        option = cheapest_via(ctx, x, {}, pair)
        if option is None:
            raise InfeasibleInstanceError(
                f"shipment {pair[0]}->{pair[1]}: every service chain is forbidden"
            )
        x.update(option)

    plan = settle(ctx, x, {})
    if plan is None:
        raise InfeasibleInstanceError("no structurally feasible initial plan")
    violations = check_structural_feasibility(ctx.inst, plan, ctx.cache)
    if violations:
        raise InfeasibleInstanceError(
            "initial plan is infeasible: " + "; ".join(str(v) for v in violations[:5])
        )
    return plan


def repair(ctx: MoveContext, plan: Plan) -> Optional[Plan]:
    """Normalize a plan and route what cannot run direct; None if impossible."""
    return settle(ctx, dict(plan.via), plan.rank)


# =============================================================================
# Moves
# =============================================================================

def _pick(rng: np.random.Generator, items: List):
    return items[int(rng.integers(len(items)))]


def _toggle(ctx: MoveContext, plan: Plan, rng: np.random.Generator) -> Optional[Plan]:
    inst = ctx.inst
    off = [p for p in plan.services if not inst.is_mandated(p)]
    on = [c for c, _ in plan.x if ctx.allowed(c)]
    choices = [(p, False) for p in off] + [(c, True) for c in on]
    if not choices:
        return None
    pair, turn_on = _pick(rng, choices)
    x = dict(plan.via)

    if turn_on:
        del x[pair]
        return settle(ctx, x, plan.rank)

    banned = frozenset({pair})
    commodities = set(commodity_pairs(inst, plan))
    affected = [c for c, k in plan.x if (c[0], k) == pair]
    if pair in commodities and pair not in x:
        affected.append(pair)
    for c in affected:
        x.pop(c, None)
    for c in sorted(affected):
        if c != pair and ctx.allowed(c, banned):
            continue
        option = cheapest_via(ctx, x, plan.rank, c, banned)
        if option is None:
            return None
        x.update(option)
    result = settle(ctx, x, plan.rank, banned)
    if result is None or pair in result.y:
        return None
    return result


def _reassign(ctx: MoveContext, plan: Plan, rng: np.random.Generator) -> Optional[Plan]:
    inst, cache = ctx.inst, ctx.cache
    commodities = [c for c in commodity_pairs(inst, plan) if not inst.is_mandated(c)]
    if not commodities:
        return None
    c = _pick(rng, commodities)
    current = plan.via.get(c)
    targets: List[Optional[str]] = []
    if current is not None and ctx.allowed(c):
        targets.append(None)
    targets.extend(
        k for k in cache.candidates(*c) if k != current and ctx.allowed((c[0], k))
    )
    if not targets:
        return None
    target = _pick(rng, targets)

    x = dict(plan.via)
    if target is None:
        del x[c]
        return settle(ctx, x, plan.rank)
    x[c] = target
    nxt = (target, c[1])
    if nxt not in x and not ctx.allowed(nxt):
        option = cheapest_via(ctx, x, plan.rank, nxt)
        if option is None:
            return None
        x.update(option)
    return settle(ctx, x, plan.rank)


def _switch_path(ctx: MoveContext, plan: Plan, rng: np.random.Generator) -> Optional[Plan]:
    cache = ctx.cache
    services = [
        p for p in plan.services
        if cache.mandated_rank(p) is None and len(cache.path_set(*p)) > 1
    ]
    if not services:
        return None
    pair = _pick(rng, services)
    size = len(cache.path_set(*pair))
    current = plan.rank.get(pair, 0)
    rank = int(rng.integers(size - 1))
    if rank >= current:
        rank += 1
    ranks = dict(plan.rank)
    ranks[pair] = rank
    return Plan.build(plan.y, plan.via, ranks)


_MOVES = (_toggle, _reassign, _switch_path)


def neighbor(
    inst: Instance,
    plan: Plan,
    rng: np.random.Generator,
    ctx: Optional[MoveContext] = None,
) -> Plan:
    """
    Apply one random move and repair the result.

    The move is chosen uniformly among toggling a service, reassigning a
    commodity's reclassification yard and switching a service's path. A
    move with no feasible repair leaves the plan unchanged.

    Args:
        inst: Problem instance
        plan: Structurally feasible plan
        rng: numpy Generator driving every random choice
        ctx: MoveContext of `inst` (built when omitted)

    Returns:
        Plan: a structurally feasible neighbor, or `plan` itself
    """
    ctx = ctx or MoveContext(inst)
    move = _MOVES[int(rng.integers(len(_MOVES)))]
    candidate = move(ctx, plan, rng)
    if candidate is None or candidate == plan:
        return plan
    if check_structural_feasibility(inst, candidate, ctx.cache):
        return plan
    return candidate


def random_walk(ctx: MoveContext, plan: Plan, rng: np.random.Generator, steps: int) -> Iterable[Plan]:
    """Yield `steps` successive neighbors, each accepted unconditionally."""
    for _ in range(steps):
        plan = neighbor(ctx.inst, plan, rng, ctx)
        yield plan

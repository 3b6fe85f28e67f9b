"""Exhaustive solver for desk-scale instances."""

import itertools
import logging
import math
import time
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterator, Optional, Tuple

from ..cache import PathCache
from ..config import get_settings
from ..elastic import score
from ..errors import EnumerationCapExceeded, InfeasibleInstanceError
from ..flow import Plan, check_structural_feasibility, enumerate_strategies
from ..instance import Instance, Pair
from ..observability import traced
from .moves import MoveContext
from .solution import Solution, build_solution

logger = logging.getLogger(__name__)

SOLVER_ID = "exact"


@dataclass(frozen=True)
class ExactLimits:
    max_plans: int = 2_000_000
    max_yards: int = 8

    @classmethod
    def from_settings(cls) -> "ExactLimits":
        settings = get_settings()
        return cls(max_plans=settings.exact_max_plans, max_yards=settings.exact_max_yards)


def estimate_plans(inst: Instance, cache: PathCache) -> float:
    """Product over shipments of the (strategy chain, path) combinations."""
    services = list(cache.service_pairs())
    estimate = 1.0
    for i, j in inst.shipment_pairs:
        combos = 0
        for chain in enumerate_strategies(inst, services, i, j, cache):
            combos += math.prod(len(cache.path_set(*s)) for s in chain)
        estimate *= max(1, combos)
    return estimate


def _decisions(ctx: MoveContext) -> Iterator[Dict[Pair, str]]:
    """
    Every consistent set of commodity decisions.

    A commodity is carried direct or handed to one candidate yard; handing
    (i, j) to k opens commodity (k, j). Branches that would provide a
    forbidden service, defer a commodity whose pair is already a first leg
    (or the reverse), or close a deferral cycle are cut.
    """
    inst, cache = ctx.inst, ctx.cache

    def rec(
        pending: Tuple[Pair, ...],
        x: Dict[Pair, str],
        direct: FrozenSet[Pair],
        first_legs: FrozenSet[Pair],
    ) -> Iterator[Dict[Pair, str]]:
        if not pending:
            yield dict(x)
            return
        c, rest = pending[0], pending[1:]
        if c in x or c in direct:
            yield from rec(rest, x, direct, first_legs)
            return

        if ctx.allowed(c):
            yield from rec(rest, x, direct | {c}, first_legs)

        if inst.is_mandated(c) or c in first_legs:
            return
        i, j = c
        for k in cache.candidates(i, j):
            leg = (i, k)
            if not ctx.allowed(leg) or leg in x:
                continue
            cur, cyclic = k, False
            while (cur, j) in x:
                cur = x[(cur, j)]
                if cur == i:
                    cyclic = True
                    break
            if cyclic:
                continue
            nxt = (k, j)
            x2 = dict(x)
            x2[c] = k
            queue = rest
            if nxt not in x and nxt not in direct and nxt not in rest:
                queue = tuple(sorted(rest + (nxt,)))
            yield from rec(queue, x2, direct, first_legs | {leg})

    yield from rec(tuple(inst.shipment_pairs), {}, frozenset(), frozenset())


def solve_exact(
    inst: Instance,
    limits: Optional[ExactLimits] = None,
    rigid: bool = False,
    cache: Optional[PathCache] = None,
) -> Solution:
    """
    Global minimizer of the search objective by full enumeration.

    Commodity decisions are enumerated first; y follows from them and the
    mandates, and path ranks are enumerated only for services that carry
    cars. Ties are broken by the lexicographic plan encoding.

    Args:
        inst: Problem instance
        limits: Enumeration caps (settings defaults when None)
        rigid: Optimize against the rigid bounds and report rigid violations
        cache: PathCache of `inst`

    Returns:
        Solution: optimal plan with its cost recomputed from scratch

    Raises:
        EnumerationCapExceeded: If the instance is larger than the caps allow
        InfeasibleInstanceError: If no structurally feasible plan exists
    """
    limits = limits or ExactLimits.from_settings()
    if len(inst.yards) > limits.max_yards:
        raise EnumerationCapExceeded(len(inst.yards), limits.max_yards, "yards")

    started = time.perf_counter()
    ctx = MoveContext(inst, cache, rigid=rigid)
    estimate = estimate_plans(inst, ctx.cache)
    if estimate > limits.max_plans:
        raise EnumerationCapExceeded(estimate, limits.max_plans)
    logger.info("exact search over an estimated %.3g plans", estimate)

    best: Optional[Tuple[Tuple, Plan]] = None
    evaluated = 0
    with traced("solve_exact", yards=len(inst.yards), rigid=rigid):
        for x in _decisions(ctx):
            base = ctx.finish(x, {})
            if check_structural_feasibility(inst, base, ctx.cache):
                continue
            loaded = score(inst, base, ctx.cache, ctx.penalty_inst).flow.D
            free = [
                p for p in base.services
                if loaded.get(p, 0.0) > 0
                and ctx.cache.mandated_rank(p) is None
                and len(ctx.cache.path_set(*p)) > 1
            ]
            for ranks in itertools.product(*(range(len(ctx.cache.path_set(*p))) for p in free)):
                xi = dict(base.rank)
                xi.update(zip(free, ranks))
                plan = Plan.build(base.y, base.via, xi)
                evaluated += 1
                if evaluated > limits.max_plans:
                    raise EnumerationCapExceeded(evaluated, limits.max_plans, "evaluated plans")
                total = score(inst, plan, ctx.cache, ctx.penalty_inst).cost.total
                key = (round(total, 9), plan.encode())
                if best is None or key < best[0]:
                    best = (key, plan)

    if best is None:
        raise InfeasibleInstanceError("no structurally feasible plan exists")

    elapsed = time.perf_counter() - started
    solution = build_solution(
        inst, best[1], SOLVER_ID, ctx.cache, rigid=rigid, iterations=evaluated, wall_time=elapsed
    )
    logger.info(
        "exact solver evaluated %d plans, best total %.6g in %.2fs",
        evaluated, solution.cost.total, elapsed,
    )
    return solution

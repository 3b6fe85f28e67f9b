"""Candidate physical paths for train services.

Every potential service (i, j) gets a PathSet: the K shortest loopless paths
from i to j whose extra length over the shortest one stays within the detour
cap. Paths are produced with networkx's Yen-style generator and re-sorted by
(length, yard sequence) so that equal-length paths come out in a fixed order.
"""

import logging
import math
from dataclasses import dataclass
from typing import Iterator, List, Optional, Tuple

import networkx as nx

from .errors import UnreachablePairError
from .instance import Instance, Link, Pair

logger = logging.getLogger(__name__)

DEFAULT_DETOUR_FACTOR = 0.4
_EPS = 1e-9


@dataclass(frozen=True)
class Path:
    """One loopless yard sequence realizing service (i, j)."""

    pair: Pair
    yards: Tuple[str, ...]
    links: Tuple[str, ...]
    total_length: float

    @property
    def arcs(self) -> Tuple[Pair, ...]:
        return tuple(zip(self.yards, self.yards[1:]))

    def label(self) -> str:
        return "-".join(self.yards)


@dataclass(frozen=True)
class PathSet:
    """Candidate paths for one service, shortest first."""

    pair: Pair
    paths: Tuple[Path, ...]
    extra_lengths: Tuple[float, ...]
    mandated_index: Optional[int] = None
    # True when the mandated path lies outside K or the detour cap
    forced: bool = False

    shortest_index: int = 0

    def __len__(self) -> int:
        return len(self.paths)

    def __getitem__(self, rank: int) -> Path:
        return self.paths[rank]

    @property
    def shortest(self) -> Path:
        return self.paths[self.shortest_index]


def _sort_key(path: Path) -> Tuple[float, Tuple[str, ...]]:
    return (round(path.total_length, 9), path.yards)


def _to_path(inst: Instance, pair: Pair, yards: List[str]) -> Path:
    links = tuple(inst.link_by_pair[(u, v)].id for u, v in zip(yards, yards[1:]))
    length = sum(inst.link_by_pair[(u, v)].length for u, v in zip(yards, yards[1:]))
    return Path(pair=pair, yards=tuple(yards), links=links, total_length=float(length))


def _simple_paths(inst: Instance, i: str, j: str) -> Iterator[Path]:
    """Loopless paths in nondecreasing length order."""
    if i not in inst.yard_by_id or j not in inst.yard_by_id:
        missing = i if i not in inst.yard_by_id else j
        raise UnreachablePairError(i, j, f"unknown yard '{missing}'")
    if i == j:
        raise UnreachablePairError(i, j, "origin equals destination")
    try:
        for yards in nx.shortest_simple_paths(inst.graph, i, j, weight="length"):
            yield _to_path(inst, (i, j), yards)
    except nx.NetworkXNoPath as exc:
        raise UnreachablePairError(i, j) from exc


def shortest_path(inst: Instance, i: str, j: str) -> Path:
    """
    Minimum-length loopless path from i to j.

    Ties are broken by the lexicographic yard sequence.

    Raises:
        UnreachablePairError: If j cannot be reached from i
    """
    best: List[Path] = []
    for path in _simple_paths(inst, i, j):
        if best and path.total_length > best[0].total_length + _EPS:
            break
        best.append(path)
    return min(best, key=_sort_key)


def shortest_distance(inst: Instance, i: str, j: str) -> float:
    """Shortest i->j length in km, or math.inf when j is unreachable."""
    try:
        return float(nx.dijkstra_path_length(inst.graph, i, j, weight="length"))
    except (nx.NetworkXNoPath, nx.NodeNotFound):
        return math.inf


def resolve_detour_cap(inst: Instance, shortest_length: float) -> float:
    """Instance detour cap in km, or the default share of the shortest length."""
    if inst.params.detour_cap is not None:
        return inst.params.detour_cap
    return DEFAULT_DETOUR_FACTOR * shortest_length


def enumerate_paths(
    inst: Instance,
    i: str,
    j: str,
    k: Optional[float] = None,
    detour_cap: Optional[float] = None,
) -> PathSet:
    """
    Build the candidate PathSet of service (i, j).

    Args:
        inst: Problem instance
        i: Origin yard of the service
        j: Destination yard of the service
        k: Maximum number of paths (instance K when None, math.inf for all)
        detour_cap: Maximum extra km over the shortest path (instance setting
            when None, math.inf for no limit)

    Returns:
        PathSet: paths sorted by (length, yard sequence); a mandated path for
        the pair is always present, appended and flagged when it falls
        outside K or the cap

    Raises:
        UnreachablePairError: If j cannot be reached from i

    Example:
        >>> ps = enumerate_paths(load_fixture("fig1"), "A", "E")
        >>> [p.total_length for p in ps.paths]
        [520.0, 550.0]
    """
    limit = inst.params.k if k is None else k
    collected: List[Path] = []
    shortest_length: Optional[float] = None
    cap = math.inf

    for path in _simple_paths(inst, i, j):
        if shortest_length is None:
            shortest_length = path.total_length
            cap = resolve_detour_cap(inst, shortest_length) if detour_cap is None else detour_cap
        if path.total_length - shortest_length > cap + _EPS:
            break
        # Keep every path tied with the K-th before truncating.
        if len(collected) >= limit and path.total_length > collected[-1].total_length + _EPS:
            break
        collected.append(path)

    collected.sort(key=_sort_key)
    paths = collected if math.isinf(limit) else collected[: int(limit)]

    mandated_index: Optional[int] = None
    forced = False
    mandated = inst.mandated_path((i, j))
    if mandated is not None:
        for rank, path in enumerate(paths):
            if path.yards == mandated:
                mandated_index = rank
                break
        else:
            paths.append(_to_path(inst, (i, j), list(mandated)))
            mandated_index = len(paths) - 1
            forced = True
            logger.warning(
                "mandated path %s for %s->%s lies outside the candidate set; appended",
                "-".join(mandated), i, j,
            )

    base = paths[0].total_length
    return PathSet(
        pair=(i, j),
        paths=tuple(paths),
        extra_lengths=tuple(max(0.0, p.total_length - base) for p in paths),
        mandated_index=mandated_index,
        forced=forced,
    )


def arc_incidence(p: Path, n: Link) -> int:
    """1 iff link `n` is a member of path `p`."""
    return 1 if n.id in p.links else 0


def candidate_yards(inst: Instance, i: str, j: str, distances=None) -> Tuple[str, ...]:
    """
    Reclassification yards P(i, j) for commodity (i, j).

    A yard k outside {i, j} qualifies when the detour i->k->j measured on
    shortest lengths stays within the detour cap of the pair.
    """
    def dist(u: str, v: str) -> float:
        if distances is not None:
            return distances.get(u, {}).get(v, math.inf)
        return shortest_distance(inst, u, v)

    direct = dist(i, j)
    if math.isinf(direct):
        return ()
    cap = resolve_detour_cap(inst, direct)
    result = []
    for k in inst.yard_ids:
        if k in (i, j):
            continue
        detour = dist(i, k) + dist(k, j) - direct
        if detour <= cap + _EPS:
            result.append(k)
    return tuple(result)

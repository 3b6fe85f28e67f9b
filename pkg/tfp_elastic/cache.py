"""Per-instance cache of path sets, distances and candidate yards."""

import logging
import math
import threading
from collections import OrderedDict
from typing import Any, Dict, Iterable, Optional, Tuple

import networkx as nx

from .errors import UnreachablePairError
from .instance import Instance, Pair
from .routing import PathSet, candidate_yards, enumerate_paths

logger = logging.getLogger(__name__)

MAX_CACHED_INSTANCES = 32


class PathCache:
    """Fast lookup of routing data for one immutable Instance."""

    def __init__(self, inst: Instance):
        """
        Initialize the cache and compute all-pairs shortest distances.

        Args:
            inst: Instance whose routing data is cached
        """
        self.inst = inst
        self.distances: Dict[str, Dict[str, float]] = {
            src: dict(lengths)
            for src, lengths in nx.all_pairs_dijkstra_path_length(inst.graph, weight="length")
        }
        self._path_sets: Dict[Pair, PathSet] = {}
        self._candidates: Dict[Pair, Tuple[str, ...]] = {}
        self._lock = threading.Lock()
        self.statistics: Dict[str, int] = {
            "path_set_hits": 0,
            "path_set_misses": 0,
            "candidate_hits": 0,
            "candidate_misses": 0,
        }

    def distance(self, i: str, j: str) -> float:
        return self.distances.get(i, {}).get(j, math.inf)

    def reachable(self, i: str, j: str) -> bool:
        return i != j and not math.isinf(self.distance(i, j))

    def path_set(self, i: str, j: str) -> PathSet:
        """
        PathSet of service (i, j), computed on first use.

        Raises:
            UnreachablePairError: If j cannot be reached from i
        """
        pair = (i, j)
        cached = self._path_sets.get(pair)
        if cached is not None:
            self.statistics["path_set_hits"] += 1
            return cached
        if not self.reachable(i, j):
            raise UnreachablePairError(i, j)
        ps = enumerate_paths(self.inst, i, j)
        with self._lock:
            self._path_sets.setdefault(pair, ps)
            self.statistics["path_set_misses"] += 1
        return self._path_sets[pair]

    def candidates(self, i: str, j: str) -> Tuple[str, ...]:
        """Reclassification yards P(i, j)."""
        pair = (i, j)
        cached = self._candidates.get(pair)
        if cached is not None:
            self.statistics["candidate_hits"] += 1
            return cached
        result = candidate_yards(self.inst, i, j, distances=self.distances)
        with self._lock:
            self._candidates.setdefault(pair, result)
            self.statistics["candidate_misses"] += 1
        return result

    def mandated_rank(self, pair: Pair) -> Optional[int]:
        if self.inst.mandated_path(pair) is None:
            return None
        return self.path_set(*pair).mandated_index

    def default_rank(self, pair: Pair) -> int:
        """Path rank a newly opened service starts on."""
        rank = self.mandated_rank(pair)
        return 0 if rank is None else rank

    def service_pairs(self) -> Iterable[Pair]:
        """Every reachable, non-forbidden ordered pair that could host a service."""
        for i in self.inst.yard_ids:
            for j in self.inst.yard_ids:
                if self.reachable(i, j) and not self.inst.is_forbidden((i, j)):
                    yield (i, j)

    def warm(self) -> "PathCache":
        """Precompute path sets and candidate yards for every service pair."""
        count = 0
        for i, j in self.service_pairs():
            self.path_set(i, j)
            self.candidates(i, j)
            count += 1
        logger.debug("path cache warmed for %d service pairs", count)
        return self

    def get_statistics(self) -> Dict[str, Any]:
        """
        Get cache statistics.

        Returns:
            Statistics dictionary with hit/miss counters and sizes
        """
        return {
            "yards": len(self.inst.yards),
            "path_sets": len(self._path_sets),
            "candidate_sets": len(self._candidates),
            **self.statistics,
        }


# Recently used caches, keyed by instance identity
_cache_map: "OrderedDict[int, Tuple[Instance, PathCache]]" = OrderedDict()
_cache_lock = threading.Lock()


def get_path_cache(inst: Instance) -> PathCache:
    """
    Get (or create) the PathCache of an instance.

    Caches are memoized by object identity; the least recently used one is
    dropped once MAX_CACHED_INSTANCES are held.

    Args:
        inst: Instance to look up

    Returns:
        PathCache scoped to the instance
    """
    key = id(inst)
    with _cache_lock:
        entry = _cache_map.get(key)
        if entry is not None and entry[0] is inst:
            _cache_map.move_to_end(key)
            return entry[1]
        cache = PathCache(inst)
        _cache_map[key] = (inst, cache)
        _cache_map.move_to_end(key)
        while len(_cache_map) > MAX_CACHED_INSTANCES:
            _cache_map.popitem(last=False)
        return cache


def clear_path_caches() -> None:
    """Drop every memoized PathCache."""
    with _cache_lock:
        _cache_map.clear()

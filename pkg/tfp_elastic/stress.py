"""Daily demand fluctuation against a fixed plan.

Each day draws every listed shipment volume from its distribution, pushes
the volumes through the unchanged plan and records membership degrees and
penalties. Day d uses its own generator seeded with (seed, d), so days are
independent of each other and of the evaluation order.
"""

import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Literal, Mapping, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .cache import PathCache, get_path_cache
from .config import get_settings
from .elastic import SatisfactionProfile, operating_cost, penalties
from .errors import StressSpecError
from .flow import Plan, propagate_flows, require_feasible
from .instance import Instance, Pair
from .observability import traced

logger = logging.getLogger(__name__)


class ShipmentDistribution(BaseModel):
    """Daily volume law of one shipment."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    pair: Tuple[str, str]
    kind: Literal["fixed", "uniform", "two_point"] = "fixed"
    value: Optional[float] = Field(None, ge=0, description="fixed volume; instance volume when unset")
    lo: Optional[int] = Field(None, ge=0)
    hi: Optional[int] = Field(None, ge=0)
    v1: Optional[float] = Field(None, ge=0)
    p: Optional[float] = Field(None, ge=0, le=1)
    v2: Optional[float] = Field(None, ge=0)

    @model_validator(mode="after")
    def _check_kind(self) -> "ShipmentDistribution":
        if self.kind == "uniform":
            if self.lo is None or self.hi is None:
                raise ValueError("uniform distribution needs lo and hi")
            if self.lo > self.hi:
                raise ValueError("uniform distribution needs lo <= hi")
        if self.kind == "two_point" and (self.v1 is None or self.v2 is None or self.p is None):
            raise ValueError("two_point distribution needs v1, p and v2")
        return self

    def sample(self, rng: np.random.Generator, base: float) -> float:
        if self.kind == "fixed":
            return base if self.value is None else self.value
        if self.kind == "uniform":
            return float(rng.integers(self.lo, self.hi + 1))
        drawn = self.v1 if rng.random() < self.p else self.v2
        # whole cars, half-up
        return float(math.floor(drawn + 0.5))


class StressSpec(BaseModel):
    """Stress scenario: distributions, number of days and base seed."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    days: int = Field(..., ge=1)
    seed: int = Field(0, ge=0)
    shipments: List[ShipmentDistribution] = Field(default_factory=list)


def parse_stress_spec(
    data: Union[str, bytes, Mapping[str, Any]],
    days: Optional[int] = None,
    seed: Optional[int] = None,
) -> StressSpec:
    """
    Parse a stress specification document, applying CLI overrides.

    Raises:
        StressSpecError: If the document is malformed
    """
    try:
        raw = json.loads(data) if isinstance(data, (str, bytes)) else dict(data)
        if days is not None:
            raw["days"] = days
        if seed is not None:
            raw["seed"] = seed
        return StressSpec.model_validate(raw)
    except (json.JSONDecodeError, ValidationError, TypeError) as exc:
        raise StressSpecError(f"stress specification is malformed: {exc}") from exc


def load_stress_spec(path: Union[str, Path], **overrides) -> StressSpec:
    path = Path(path)
    if not path.exists():
        raise StressSpecError(f"stress specification not found at {path}")
    return parse_stress_spec(path.read_text(encoding="utf-8"), **overrides)


@dataclass(frozen=True)
class DayResult:
    day: int
    volumes: Dict[Pair, float]
    profile: SatisfactionProfile
    loads: Dict[Tuple[str, str], float]
    Z: float
    G: float
    H: float
    M: float

    @property
    def penalty(self) -> float:
        return self.G + self.H + self.M


@dataclass(frozen=True)
class ResourceStats:
    kind: str
    id: str
    fraction_below_one: float
    fraction_zero: float
    mean_degree: float
    min_degree: float
    mean_load: float

    def to_dict(self) -> Dict[str, float]:
        return {
            "fraction_below_one": self.fraction_below_one,
            "fraction_zero": self.fraction_zero,
            "mean_degree": self.mean_degree,
            "mean_load": self.mean_load,
            "min_degree": self.min_degree,
        }


@dataclass
class StressReport:
    spec: StressSpec
    days: List[DayResult] = field(default_factory=list)
    resources: List[ResourceStats] = field(default_factory=list)

    def resource(self, kind: str, resource_id: str) -> ResourceStats:
        for stats in self.resources:
            if stats.kind == kind and stats.id == resource_id:
                return stats
        raise KeyError(f"no {kind} resource '{resource_id}'")

    def to_document(self) -> Dict[str, Any]:
        n = len(self.days)
        grouped: Dict[str, Dict[str, Any]] = {}
        for stats in self.resources:
            grouped.setdefault(stats.kind, {})[stats.id] = stats.to_dict()
        return {
            "days": n,
            "seed": self.spec.seed,
            "resources": grouped,
            "penalties": {
                "G_mean": float(np.mean([d.G for d in self.days])),
                "H_mean": float(np.mean([d.H for d in self.days])),
                "M_mean": float(np.mean([d.M for d in self.days])),
                "total_max": max(d.penalty for d in self.days),
                "total_mean": float(np.mean([d.penalty for d in self.days])),
            },
        }


def _run_day(
    inst: Instance,
    plan: Plan,
    spec: StressSpec,
    day: int,
    cache: PathCache,
) -> DayResult:
    rng = np.random.default_rng([spec.seed, day])
    volumes = {
        tuple(dist.pair): dist.sample(rng, inst.volume(tuple(dist.pair)))
        for dist in sorted(spec.shipments, key=lambda d: d.pair)
    }
    day_inst = inst.with_volumes(volumes) if volumes else inst
    fs = propagate_flows(day_inst, plan, cache)
    G, H, M, profile = penalties(day_inst, plan, fs)
    z = operating_cost(day_inst, plan, fs, cache)
    loads: Dict[Tuple[str, str], float] = {}
    loads.update({("yard_reclass", k): v for k, v in fs.yard_reclass.items()})
    loads.update({("yard_tracks", k): v for k, v in fs.yard_tracks.items()})
    loads.update({("link", k): v for k, v in fs.link_trains.items()})
    return DayResult(day=day, volumes=volumes, profile=profile, loads=loads, Z=z.Z, G=G, H=H, M=M)


def _aggregate(days: List[DayResult]) -> List[ResourceStats]:
    n = len(days)
    keys = [(kind, rid) for kind, rid, _ in days[0].profile.resources()]
    table = np.array([[deg for _, _, deg in d.profile.resources()] for d in days])
    stats = []
    for index, (kind, rid) in enumerate(keys):
        degrees = table[:, index]
        loads = np.array([d.loads.get((kind, rid), 0.0) for d in days])
        stats.append(
            ResourceStats(
                kind=kind,
                id=rid,
                fraction_below_one=float(np.count_nonzero(degrees < 1.0)) / n,
                fraction_zero=float(np.count_nonzero(degrees == 0.0)) / n,
                mean_degree=float(degrees.mean()),
                min_degree=float(degrees.min()),
                mean_load=float(loads.mean()),
            )
        )
    return stats


def stress(
    inst: Instance,
    plan: Plan,
    spec: StressSpec,
    cache: Optional[PathCache] = None,
    workers: Optional[int] = None,
) -> StressReport:
    """
    Evaluate a fixed plan under sampled daily volumes.

    Args:
        inst: Problem instance (base volumes and belts)
        plan: Structurally feasible plan, held fixed over all days
        spec: Distributions, day count and seed
        cache: PathCache of `inst`
        workers: Thread pool size (TFP_WORKERS when None)

    Returns:
        StressReport: per-day profiles and penalties plus per-resource
        fractions of days below full satisfaction and at zero

    Raises:
        StressSpecError: If the spec names a pair that is not a shipment
        StructuralInfeasibilityError: If the plan is not feasible for `inst`
    """
    cache = cache or get_path_cache(inst)
    unknown = sorted(tuple(d.pair) for d in spec.shipments if tuple(d.pair) not in inst.volumes)
    if unknown:
        names = ", ".join(f"{i}->{j}" for i, j in unknown)
        raise StressSpecError(f"stress specification names non-shipment pair(s): {names}")
    require_feasible(inst, plan, cache)

    workers = workers or get_settings().workers
    day_numbers = range(spec.days)
    with traced("stress", days=spec.days, seed=spec.seed):
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                days = list(pool.map(lambda d: _run_day(inst, plan, spec, d, cache), day_numbers))
        else:
            days = [_run_day(inst, plan, spec, d, cache) for d in day_numbers]

    report = StressReport(spec=spec, days=days, resources=_aggregate(days))
    logger.info("stress run over %d day(s) from seed %d", spec.days, spec.seed)
    return report

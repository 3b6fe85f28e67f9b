"""Problem data model: yards, links, shipments, parameters and capacity belts.

Instance documents are JSON. They are checked in two passes: the pydantic
schema catches missing fields, wrong types and unknown keys, then
validate_instance() checks the semantic invariants and reports every
violation with its location.
"""

import json
import logging
from dataclasses import dataclass, field, replace
from functools import cached_property
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union

import networkx as nx
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from .errors import InstanceSchemaError, InstanceValidationError

logger = logging.getLogger(__name__)

Pair = Tuple[str, str]

FIXTURES_DIR = Path(__file__).resolve().parent / "fixtures"
CANONICAL_NAMES = ("fig1", "fig2", "yardC")

DEFAULT_TRAIN_SIZE = 50.0
DEFAULT_LAMBDA = 1.0
DEFAULT_CARS_PER_TRACK = 200.0
DEFAULT_PENALTY = 1500.0
DEFAULT_K = 5

# Local services of the linear network plus the six direct services drawn in
# the second figure; A->E is deliberately absent.
FIG2_SERVICE_NETWORK: frozenset = frozenset(
    {
        ("A", "B"), ("B", "A"), ("B", "C"), ("C", "B"),
        ("C", "D"), ("D", "C"), ("D", "E"), ("E", "D"),
        ("A", "C"), ("B", "D"), ("B", "E"),
        ("C", "A"), ("D", "B"), ("E", "C"),
    }
)


# =============================================================================
# Domain types
# =============================================================================

@dataclass(frozen=True)
class CapacityBelt:
    """Interval between guaranteed and maximal elastic capacity."""

    lower: float
    upper: float

    @property
    def degenerate(self) -> bool:
        return self.lower == self.upper

    def widened(self, factor: float) -> "CapacityBelt":
        """Same lower bound, upper bound scaled by `factor`."""
        return CapacityBelt(self.lower, self.upper * factor)

    def as_list(self) -> List[float]:
        return [_num(self.lower), _num(self.upper)]


@dataclass(frozen=True)
class Yard:
    id: str
    reclass_belt: CapacityBelt
    track_belt: CapacityBelt
    c: float = 1.0
    tau: float = 2.0
    theta: float = 1.0


@dataclass(frozen=True)
class Link:
    id: str
    from_yard: str
    to_yard: str
    length: float
    capacity_belt: CapacityBelt
    beta_n: float = 1.0


@dataclass(frozen=True)
class Shipment:
    origin: str
    destination: str
    volume: float

    @property
    def pair(self) -> Pair:
        return (self.origin, self.destination)


@dataclass(frozen=True)
class Params:
    train_size: float = DEFAULT_TRAIN_SIZE
    train_size_overrides: Tuple[Tuple[Pair, float], ...] = ()
    lam: float = DEFAULT_LAMBDA
    cars_per_track: float = DEFAULT_CARS_PER_TRACK
    alpha: float = DEFAULT_PENALTY
    beta: float = DEFAULT_PENALTY
    k: int = DEFAULT_K
    detour_cap: Optional[float] = None


@dataclass(frozen=True)
class Instance:
    """Immutable problem description shared by every solver chain."""

    yards: Tuple[Yard, ...]
    links: Tuple[Link, ...]
    shipments: Tuple[Shipment, ...]
    params: Params = field(default_factory=Params)
    mandated_services: frozenset = frozenset()
    forbidden_services: frozenset = frozenset()
    mandated_paths: Tuple[Tuple[Pair, Tuple[str, ...]], ...] = ()
    description: Optional[str] = None

    @cached_property
    def yard_by_id(self) -> Dict[str, Yard]:
        return {y.id: y for y in self.yards}

    @cached_property
    def link_by_id(self) -> Dict[str, Link]:
        return {lk.id: lk for lk in self.links}

    @cached_property
    def link_by_pair(self) -> Dict[Pair, Link]:
        return {(lk.from_yard, lk.to_yard): lk for lk in self.links}

    @cached_property
    def yard_ids(self) -> Tuple[str, ...]:
        return tuple(sorted(self.yard_by_id))

    @cached_property
    def volumes(self) -> Dict[Pair, float]:
        return {s.pair: s.volume for s in self.shipments}

    @cached_property
    def shipment_pairs(self) -> Tuple[Pair, ...]:
        return tuple(sorted(self.volumes))

    @cached_property
    def graph(self) -> nx.DiGraph:
        """Directed physical network weighted by link length."""
        g = nx.DiGraph()
        g.add_nodes_from(self.yard_ids)
        for lk in self.links:
            g.add_edge(lk.from_yard, lk.to_yard, length=lk.length, link=lk.id)
        return g

    @cached_property
    def _train_size_overrides(self) -> Dict[Pair, float]:
        return dict(self.params.train_size_overrides)

    @cached_property
    def _mandated_path_map(self) -> Dict[Pair, Tuple[str, ...]]:
        return dict(self.mandated_paths)

    def volume(self, pair: Pair) -> float:
        return self.volumes.get(pair, 0.0)

    def train_size(self, pair: Pair) -> float:
        """m_ij: per-pair override or the network-wide default."""
        return self._train_size_overrides.get(pair, self.params.train_size)

    def mandated_path(self, pair: Pair) -> Optional[Tuple[str, ...]]:
        return self._mandated_path_map.get(pair)

    def is_mandated(self, pair: Pair) -> bool:
        return pair in self.mandated_services

    def is_forbidden(self, pair: Pair) -> bool:
        return pair in self.forbidden_services

    def with_volumes(self, volumes: Mapping[Pair, float]) -> "Instance":
        """Copy with shipment volumes replaced; unknown pairs become new shipments."""
        current = dict(self.volumes)
        current.update(volumes)
        shipments = tuple(Shipment(o, d, float(v)) for (o, d), v in sorted(current.items()))
        return replace(self, shipments=shipments)

    def with_belts(
        self,
        reclass: Optional[Mapping[str, CapacityBelt]] = None,
        tracks: Optional[Mapping[str, CapacityBelt]] = None,
        links: Optional[Mapping[str, CapacityBelt]] = None,
    ) -> "Instance":
        """Copy with selected yard/link belts replaced (keys are yard or link ids)."""
        reclass = reclass or {}
        tracks = tracks or {}
        links = links or {}
        yards = tuple(
            replace(
                y,
                reclass_belt=reclass.get(y.id, y.reclass_belt),
                track_belt=tracks.get(y.id, y.track_belt),
            )
            for y in self.yards
        )
        new_links = tuple(
            replace(lk, capacity_belt=links.get(lk.id, lk.capacity_belt)) for lk in self.links
        )
        return replace(self, yards=yards, links=new_links)

    def rigidified(self) -> "Instance":
        """
        Collapse every belt onto its rigid bound.

        Reclassification belts become [θ·C_R^lower] twice, track belts
        [C_TR^lower] twice and link belts [β_n·C_n^lower] twice, so the
        membership functions degenerate into the hard checks of rigid mode.
        """
        yards = tuple(
            replace(
                y,
                reclass_belt=_point(y.theta * y.reclass_belt.lower),
                track_belt=_point(y.track_belt.lower),
            )
            for y in self.yards
        )
        links = tuple(
            replace(lk, capacity_belt=_point(lk.beta_n * lk.capacity_belt.lower))
            for lk in self.links
        )
        return replace(self, yards=yards, links=links)


def _point(value: float) -> CapacityBelt:
    return CapacityBelt(value, value)


def _num(value: float) -> Union[int, float]:
    """Integral floats serialize as integers so documents stay tidy."""
    if isinstance(value, float) and value.is_integer():
        return int(value)
    return value


# =============================================================================
# Document schema
# =============================================================================

class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class YardDoc(_Strict):
    id: str = Field(..., min_length=1, description="Symbolic yard name")
    c: float = Field(1.0, description="Accumulation parameter c_i")
    tau: float = Field(2.0, description="Unit reclassification cost")
    reclass_belt: Tuple[float, float] = Field(..., description="[lower, upper] cars/day")
    track_belt: Tuple[float, float] = Field(..., description="[lower, upper] tracks")
    theta: float = Field(1.0, description="Rigid-mode utilization coefficient")


class LinkDoc(_Strict):
    id: str = Field(..., min_length=1)
    from_yard: str
    to_yard: str
    length: float = Field(..., description="km")
    capacity_belt: Tuple[float, float] = Field(..., description="[lower, upper] trains/day")
    beta_n: float = Field(1.0, description="Rigid-mode utilization coefficient")


class ShipmentDoc(_Strict):
    origin: str
    destination: str
    volume: float = Field(..., description="cars/day")


class TrainSizeOverrideDoc(_Strict):
    pair: Tuple[str, str]
    size: float


class TrainSizeDoc(_Strict):
    default: float = DEFAULT_TRAIN_SIZE
    overrides: List[TrainSizeOverrideDoc] = Field(default_factory=list)


class ParamsDoc(_Strict):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    train_size: Union[float, TrainSizeDoc] = DEFAULT_TRAIN_SIZE
    lambda_: float = Field(DEFAULT_LAMBDA, alias="lambda")
    cars_per_track: float = DEFAULT_CARS_PER_TRACK
    alpha: float = DEFAULT_PENALTY
    beta: float = DEFAULT_PENALTY
    K: int = DEFAULT_K
    detour_cap: Optional[float] = None


class MandatedPathDoc(_Strict):
    service: Tuple[str, str]
    yards: List[str]


class InstanceDocument(_Strict):
    """Top-level instance document; unknown keys are rejected."""

    description: Optional[str] = Field(None, description="Free-text note on the instance")
    yards: List[YardDoc]
    links: List[LinkDoc]
    shipments: List[ShipmentDoc]
    params: ParamsDoc = Field(default_factory=ParamsDoc)
    mandated_services: List[Tuple[str, str]] = Field(default_factory=list)
    forbidden_services: List[Tuple[str, str]] = Field(default_factory=list)
    mandated_paths: List[MandatedPathDoc] = Field(default_factory=list)


def _instance_from_document(doc: InstanceDocument) -> Instance:
    yards = tuple(
        sorted(
            (
                Yard(
                    id=y.id,
                    c=y.c,
                    tau=y.tau,
                    reclass_belt=CapacityBelt(*map(float, y.reclass_belt)),
                    track_belt=CapacityBelt(*map(float, y.track_belt)),
                    theta=y.theta,
                )
                for y in doc.yards
            ),
            key=lambda y: y.id,
        )
    )
    links = tuple(
        sorted(
            (
                Link(
                    id=lk.id,
                    from_yard=lk.from_yard,
                    to_yard=lk.to_yard,
                    length=float(lk.length),
                    capacity_belt=CapacityBelt(*map(float, lk.capacity_belt)),
                    beta_n=lk.beta_n,
                )
                for lk in doc.links
            ),
            key=lambda lk: lk.id,
        )
    )
    shipments = tuple(
        sorted(
            (Shipment(s.origin, s.destination, float(s.volume)) for s in doc.shipments),
            key=lambda s: (s.pair, s.volume),
        )
    )

    ts = doc.params.train_size
    if isinstance(ts, TrainSizeDoc):
        default_m = float(ts.default)
        overrides = tuple(sorted((tuple(o.pair), float(o.size)) for o in ts.overrides))
    else:
        default_m, overrides = float(ts), ()

    params = Params(
        train_size=default_m,
        train_size_overrides=overrides,
        lam=float(doc.params.lambda_),
        cars_per_track=float(doc.params.cars_per_track),
        alpha=float(doc.params.alpha),
        beta=float(doc.params.beta),
        k=doc.params.K,
        detour_cap=None if doc.params.detour_cap is None else float(doc.params.detour_cap),
    )

    return Instance(
        yards=yards,
        links=links,
        shipments=shipments,
        params=params,
        mandated_services=frozenset(tuple(p) for p in doc.mandated_services),
        forbidden_services=frozenset(tuple(p) for p in doc.forbidden_services),
        mandated_paths=tuple(
            sorted((tuple(mp.service), tuple(mp.yards)) for mp in doc.mandated_paths)
        ),
        description=doc.description,
    )


def instance_to_document(inst: Instance) -> Dict[str, Any]:
    """Plain-JSON document for an Instance (inverse of parse_instance)."""
    p = inst.params
    if p.train_size_overrides:
        train_size: Any = {
            "default": _num(p.train_size),
            "overrides": [
                {"pair": list(pair), "size": _num(size)} for pair, size in p.train_size_overrides
            ],
        }
    else:
        train_size = _num(p.train_size)

    doc: Dict[str, Any] = {
        "yards": [
            {
                "id": y.id,
                "c": _num(y.c),
                "tau": _num(y.tau),
                "reclass_belt": y.reclass_belt.as_list(),
                "track_belt": y.track_belt.as_list(),
                "theta": _num(y.theta),
            }
            for y in inst.yards
        ],
        "links": [
            {
                "id": lk.id,
                "from_yard": lk.from_yard,
                "to_yard": lk.to_yard,
                "length": _num(lk.length),
                "capacity_belt": lk.capacity_belt.as_list(),
                "beta_n": _num(lk.beta_n),
            }
            for lk in inst.links
        ],
        "shipments": [
            {"origin": s.origin, "destination": s.destination, "volume": _num(s.volume)}
            for s in inst.shipments
        ],
        "params": {
            "train_size": train_size,
            "lambda": _num(p.lam),
            "cars_per_track": _num(p.cars_per_track),
            "alpha": _num(p.alpha),
            "beta": _num(p.beta),
            "K": p.k,
            "detour_cap": None if p.detour_cap is None else _num(p.detour_cap),
        },
        "mandated_services": [list(pair) for pair in sorted(inst.mandated_services)],
        "forbidden_services": [list(pair) for pair in sorted(inst.forbidden_services)],
        "mandated_paths": [
            {"service": list(pair), "yards": list(yards)} for pair, yards in inst.mandated_paths
        ],
    }
    if inst.description is not None:
        doc["description"] = inst.description
    return doc


def serialize_instance(inst: Instance) -> str:
    """Serialize an Instance to a stable JSON document."""
    return json.dumps(instance_to_document(inst), indent=2)


def parse_instance(text: Union[str, bytes, Mapping[str, Any]]) -> Instance:
    """
    Parse and validate an instance document.

    Args:
        text: JSON text (or an already-decoded mapping)

    Returns:
        Instance: fully validated, immutable instance

    Raises:
        InstanceSchemaError: If the document does not match the schema
        InstanceValidationError: If any semantic invariant is violated

    Example:
        >>> inst = parse_instance(Path("fig1.json").read_text())
        >>> len(inst.yards)
        6
    """
    try:
        raw = json.loads(text) if isinstance(text, (str, bytes)) else dict(text)
    except json.JSONDecodeError as exc:
        raise InstanceSchemaError(f"instance is not valid JSON: {exc}") from exc

    try:
        doc = InstanceDocument.model_validate(raw)
    except ValidationError as exc:
        problems = [
            f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in exc.errors()
        ]
        raise InstanceSchemaError(
            "instance does not match schema: " + "; ".join(problems), problems
        ) from exc

    inst = _instance_from_document(doc)
    report = validate_instance(inst)
    if not report.is_valid:
        raise InstanceValidationError(report)
    return inst


def load_instance(path: Union[str, Path]) -> Instance:
    """Read and parse an instance file."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"instance file not found at {path}")
    return parse_instance(path.read_text(encoding="utf-8"))


# =============================================================================
# Validation
# =============================================================================

@dataclass(frozen=True)
class Violation:
    location: str
    message: str

    def __str__(self) -> str:
        return f"{self.location}: {self.message}"


@dataclass
class ValidationReport:
    violations: List[Violation] = field(default_factory=list)

    @property
    def is_valid(self) -> bool:
        return not self.violations

    def add(self, location: str, message: str) -> None:
        self.violations.append(Violation(location, message))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "valid": self.is_valid,
            "violations": [{"location": v.location, "message": v.message} for v in self.violations],
        }


def _check_belt(report: ValidationReport, location: str, belt: CapacityBelt) -> None:
    if belt.lower < 0 or belt.upper < 0:
        report.add(location, "belt bounds must be nonnegative")
    if belt.lower > belt.upper:
        report.add(location, f"belt lower exceeds upper ({_num(belt.lower)} > {_num(belt.upper)})")


def _fmt(pair: Pair) -> str:
    return f"{pair[0]}->{pair[1]}"


def validate_instance(inst: Instance) -> ValidationReport:
    """
    Check every Instance invariant.

    Args:
        inst: Instance to check (typically freshly converted from a document)

    Returns:
        ValidationReport: empty iff the instance is valid; each violation
        names its location (yard, link, shipment, param or service set)
    """
    report = ValidationReport()
    known = set()

    for y in inst.yards:
        loc = f"yards[{y.id}]"
        if y.id in known:
            report.add(loc, "duplicate yard id")
        known.add(y.id)
        if y.c < 0:
            report.add(loc, "c must be >= 0")
        if y.tau < 0:
            report.add(loc, "tau must be >= 0")
        if not 0 < y.theta <= 1:
            report.add(loc, "theta must be in (0, 1]")
        _check_belt(report, f"{loc}.reclass_belt", y.reclass_belt)
        _check_belt(report, f"{loc}.track_belt", y.track_belt)

    def require_yard(location: str, yard_id: str) -> bool:
        if yard_id not in known:
            report.add(location, f"unknown yard '{yard_id}'")
            return False
        return True

    link_ids = set()
    arcs = set()
    for lk in inst.links:
        loc = f"links[{lk.id}]"
        if lk.id in link_ids:
            report.add(loc, "duplicate link id")
        link_ids.add(lk.id)
        require_yard(loc, lk.from_yard)
        require_yard(loc, lk.to_yard)
        if lk.from_yard == lk.to_yard:
            report.add(loc, "from_yard equals to_yard")
        if (lk.from_yard, lk.to_yard) in arcs:
            report.add(loc, f"second link over {lk.from_yard}->{lk.to_yard}")
        arcs.add((lk.from_yard, lk.to_yard))
        if lk.length <= 0:
            report.add(loc, "length must be > 0")
        if not 0 < lk.beta_n <= 1:
            report.add(loc, "beta_n must be in (0, 1]")
        _check_belt(report, f"{loc}.capacity_belt", lk.capacity_belt)

    seen_pairs = set()
    reachable_pairs = []
    for s in inst.shipments:
        loc = f"shipments[{_fmt(s.pair)}]"
        ok = require_yard(loc, s.origin) & require_yard(loc, s.destination)
        if s.origin == s.destination:
            report.add(loc, "origin equals destination")
            ok = False
        if s.pair in seen_pairs:
            report.add(loc, "duplicate shipment for this pair")
        seen_pairs.add(s.pair)
        if s.volume < 0:
            report.add(loc, "volume must be >= 0")
        if ok:
            reachable_pairs.append((loc, s.pair))

    p = inst.params
    if p.train_size <= 0:
        report.add("params.train_size", "train size must be > 0")
    for pair, size in p.train_size_overrides:
        loc = f"params.train_size[{_fmt(pair)}]"
        require_yard(loc, pair[0])
        require_yard(loc, pair[1])
        if size <= 0:
            report.add(loc, "train size must be > 0")
    if p.lam < 0:
        report.add("params.lambda", "lambda must be >= 0")
    if p.cars_per_track <= 0:
        report.add("params.cars_per_track", "cars_per_track must be > 0")
    if p.alpha < 0:
        report.add("params.alpha", "alpha must be >= 0")
    if p.beta < 0:
        report.add("params.beta", "beta must be >= 0")
    if p.k < 1:
        report.add("params.K", "K must be >= 1")
    if p.detour_cap is not None and p.detour_cap < 0:
        report.add("params.detour_cap", "detour_cap must be >= 0")

    for name, pairs in (
        ("mandated_services", inst.mandated_services),
        ("forbidden_services", inst.forbidden_services),
    ):
        for pair in sorted(pairs):
            loc = f"{name}[{_fmt(pair)}]"
            ok = require_yard(loc, pair[0]) & require_yard(loc, pair[1])
            if pair[0] == pair[1]:
                report.add(loc, "service from a yard to itself")
            elif ok and name == "mandated_services":
                reachable_pairs.append((loc, pair))
    for pair in sorted(inst.mandated_services & inst.forbidden_services):
        report.add(f"services[{_fmt(pair)}]", "pair is both mandated and forbidden")

    for pair, yards in inst.mandated_paths:
        loc = f"mandated_paths[{_fmt(pair)}]"
        if not (require_yard(loc, pair[0]) & require_yard(loc, pair[1])):
            continue
        if not yards or yards[0] != pair[0] or yards[-1] != pair[1]:
            report.add(loc, "path must start at the service origin and end at its destination")
        if len(set(yards)) != len(yards):
            report.add(loc, "path repeats a yard")
        for u, v in zip(yards, yards[1:]):
            if (u, v) not in arcs:
                report.add(loc, f"no link {u}->{v}")
        if pair in inst.forbidden_services:
            report.add(loc, "mandated path given for a forbidden service")

    # pairs naming an unknown yard were reported above and never queued
    g = inst.graph
    for loc, (o, d) in reachable_pairs:
        if not nx.has_path(g, o, d):
            report.add(loc, f"{d} is unreachable from {o}")

    if report.violations:
        logger.warning("instance validation found %d violation(s)", len(report.violations))
    return report


# =============================================================================
# Canonical fixtures
# =============================================================================

def load_fixture(name: str) -> Instance:
    """Load one canonical fixture (`fig1`, `fig2` or `yardC`)."""
    if name not in CANONICAL_NAMES:
        raise KeyError(f"unknown fixture '{name}'; choose from {', '.join(CANONICAL_NAMES)}")
    return load_instance(FIXTURES_DIR / f"{name}.json")


def canonical_instances() -> Dict[str, Instance]:
    """
    The worked examples as validated instances.

    Returns:
        dict: `fig1` (six-yard routing example), `fig2` (linear network with
        local services mandated) and `yardC` (merged flow at yard C)
    """
    return {name: load_fixture(name) for name in CANONICAL_NAMES}


def resolve_instance(ref: Union[str, Path]) -> Instance:
    """Instance from a file path, or a canonical fixture given as `@name`."""
    text = str(ref)
    if text.startswith("@"):
        try:
            return load_fixture(text[1:])
        except KeyError as exc:
            raise FileNotFoundError(str(exc.args[0])) from exc
    return load_instance(text)

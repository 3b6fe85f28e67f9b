"""Shared pytest fixtures."""

import sys
from pathlib import Path
from typing import Any, Dict, Iterable, Mapping, Optional, Tuple

import pytest

ROOT = Path(__file__).resolve().parent
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from tfp_elastic.cache import clear_path_caches  # noqa: E402
from tfp_elastic.config import clear_settings_cache  # noqa: E402
from tfp_elastic.instance import Instance, load_fixture, parse_instance  # noqa: E402

AMPLE = [10_000, 12_000]


def line_document(
    yards: str,
    volumes: Mapping[Tuple[str, str], float],
    length: float = 100,
    tau: Optional[Mapping[str, float]] = None,
    mandated: Iterable[Tuple[str, str]] = (),
    forbidden: Iterable[Tuple[str, str]] = (),
    link_belt=AMPLE,
    reclass_belt=AMPLE,
    track_belt=(100, 120),
    params: Optional[Dict[str, Any]] = None,
) -> Dict[str, Any]:
    """Instance document of a line network such as "ABC" (links both ways)."""
    tau = tau or {}
    doc_yards = [
        {
            "id": y,
            "c": 1,
            "tau": tau.get(y, 2),
            "reclass_belt": list(reclass_belt),
            "track_belt": list(track_belt),
        }
        for y in yards
    ]
    links = []
    for u, v in zip(yards, yards[1:]):
        for a, b in ((u, v), (v, u)):
            links.append(
                {
                    "id": f"{a}-{b}",
                    "from_yard": a,
                    "to_yard": b,
                    "length": length,
                    "capacity_belt": list(link_belt),
                }
            )
    return {
        "yards": doc_yards,
        "links": links,
        "shipments": [
            {"origin": o, "destination": d, "volume": n} for (o, d), n in sorted(volumes.items())
        ],
        "params": {"train_size": 50, "lambda": 1, **(params or {})},
        "mandated_services": [list(p) for p in mandated],
        "forbidden_services": [list(p) for p in forbidden],
    }


@pytest.fixture
def fig1() -> Instance:
    return load_fixture("fig1")


@pytest.fixture
def fig2() -> Instance:
    return load_fixture("fig2")


@pytest.fixture
def yard_c() -> Instance:
    return load_fixture("yardC")


@pytest.fixture
def line3() -> Instance:
    """A-B-C line with N_AC=10, N_AB=5, N_BC=7 and tau = 2 at every yard."""
    return parse_instance(line_document("ABC", {("A", "C"): 10, ("A", "B"): 5, ("B", "C"): 7}))


@pytest.fixture
def make_line():
    """Builder for line-network instances (see line_document)."""

    def build(yards: str, volumes, **kwargs) -> Instance:
        return parse_instance(line_document(yards, volumes, **kwargs))

    return build


@pytest.fixture
def settings_env(monkeypatch):
    """Set TFP_* variables and refresh the cached settings."""

    def apply(**values: str) -> None:
        for key, value in values.items():
            monkeypatch.setenv(key, value)
        clear_settings_cache()

    yield apply
    clear_settings_cache()


@pytest.fixture(autouse=True)
def _fresh_caches():
    clear_settings_cache()
    clear_path_caches()
    yield
    clear_path_caches()

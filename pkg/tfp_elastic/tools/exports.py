"""CSV tables and JSON documents written by the CLI handlers."""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Union

import pandas as pd

from ..cache import PathCache
from ..config import get_settings
from ..elastic import SatisfactionProfile
from ..flow import FlowState, Plan, chain_yards, strategy_chain, trains_for
from ..instance import Instance
from ..routing import PathSet
from ..stress import StressReport

logger = logging.getLogger(__name__)


def dump_document(doc: Mapping[str, Any]) -> str:
    """Stable JSON rendering (sorted keys, 2-space indent)."""
    return json.dumps(doc, sort_keys=True, indent=2)


def resolve_output_dir(out: Optional[Union[str, Path]]) -> Optional[Path]:
    """Explicit --out directory, else TFP_OUTPUT_DIR, else None."""
    if out:
        return Path(out)
    return get_settings().output_dir


def services_table(inst: Instance, plan: Plan, fs: FlowState, cache: PathCache) -> pd.DataFrame:
    rows = []
    for pair in plan.services:
        ps = cache.path_set(*pair)
        rank = plan.rank.get(pair, 0)
        path = ps[rank]
        load = fs.service_load(pair)
        rows.append(
            {
                "origin": pair[0],
                "destination": pair[1],
                "mandated": inst.is_mandated(pair),
                "rank": rank,
                "path": path.label(),
                "length": path.total_length,
                "extra_length": ps.extra_lengths[rank],
                "cars": load,
                "trains": trains_for(load, inst.train_size(pair), get_settings().fractional_trains),
            }
        )
    return pd.DataFrame(
        rows,
        columns=["origin", "destination", "mandated", "rank", "path", "length",
                 "extra_length", "cars", "trains"],
    )


def chains_table(inst: Instance, plan: Plan) -> pd.DataFrame:
    rows = []
    for i, j in inst.shipment_pairs:
        chain = strategy_chain(inst, plan, i, j)
        rows.append(
            {
                "origin": i,
                "destination": j,
                "volume": inst.volume((i, j)),
                "services": len(chain),
                "reclassifications": len(chain) - 1,
                "yards": "-".join(chain_yards(chain)),
            }
        )
    return pd.DataFrame(
        rows, columns=["origin", "destination", "volume", "services", "reclassifications", "yards"]
    )


def loads_table(fs: FlowState) -> pd.DataFrame:
    rows = []
    for kind, values in (
        ("yard_reclass", fs.yard_reclass),
        ("yard_tracks", fs.yard_tracks),
        ("link", fs.link_trains),
    ):
        rows.extend({"kind": kind, "id": key, "load": values[key]} for key in sorted(values))
    return pd.DataFrame(rows, columns=["kind", "id", "load"])


def degrees_table(profile: SatisfactionProfile) -> pd.DataFrame:
    rows = [{"kind": kind, "id": rid, "degree": degree} for kind, rid, degree in profile.resources()]
    return pd.DataFrame(rows, columns=["kind", "id", "degree"])


def stress_days_table(report: StressReport) -> pd.DataFrame:
    rows = []
    for day in report.days:
        row: Dict[str, Any] = {"day": day.day, "Z": day.Z, "G": day.G, "H": day.H, "M": day.M}
        for (i, j), volume in sorted(day.volumes.items()):
            row[f"N_{i}{j}"] = volume
        for kind, rid, degree in day.profile.resources():
            row[f"{kind}:{rid}"] = degree
        rows.append(row)
    return pd.DataFrame(rows)


def paths_table(path_sets: List[PathSet]) -> pd.DataFrame:
    rows = []
    for ps in path_sets:
        for rank, path in enumerate(ps.paths):
            rows.append(
                {
                    "origin": ps.pair[0],
                    "destination": ps.pair[1],
                    "rank": rank,
                    "yards": path.label(),
                    "length": path.total_length,
                    "extra_length": ps.extra_lengths[rank],
                    "mandated": ps.mandated_index == rank,
                }
            )
    return pd.DataFrame(
        rows, columns=["origin", "destination", "rank", "yards", "length", "extra_length", "mandated"]
    )


def plan_tables(
    inst: Instance, plan: Plan, fs: FlowState, profile: SatisfactionProfile, cache: PathCache
) -> Dict[str, pd.DataFrame]:
    return {
        "services": services_table(inst, plan, fs, cache),
        "chains": chains_table(inst, plan),
        "loads": loads_table(fs),
        "degrees": degrees_table(profile),
    }


def write_tables(out_dir: Optional[Path], tables: Mapping[str, pd.DataFrame]) -> List[str]:
    """
    Write each table as `<name>.csv` under `out_dir`.

    Returns:
        list[str]: written file names (empty when out_dir is None)
    """
    if out_dir is None:
        return []
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for name, frame in tables.items():
        target = out_dir / f"{name}.csv"
        frame.to_csv(target, index=False)
        written.append(target.name)
    logger.info("wrote %d table(s) to %s", len(written), out_dir)
    return written

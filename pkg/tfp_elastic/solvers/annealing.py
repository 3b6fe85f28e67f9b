"""Simulated annealing over structurally feasible plans."""

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from ..cache import PathCache
from ..config import get_settings, read_config_file
from ..flow import Plan, require_feasible
from ..instance import Instance
from ..observability import traced
from .moves import MoveContext, initial_plan, neighbor, random_walk
from .solution import Solution, build_solution

logger = logging.getLogger(__name__)

SOLVER_ID = "sa"


class SAConfig(BaseModel):
    """Annealing schedule; unset fields are derived from the instance."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    initial_temperature: Optional[float] = Field(
        None, gt=0, description="Calibrated from sampled uphill moves when unset"
    )
    cooling_ratio: float = Field(0.95, gt=0, lt=1, description="Geometric cooling per epoch")
    epoch_length: Optional[int] = Field(
        None, gt=0, description="Moves per temperature; 100 x shipments when unset"
    )
    min_temperature: Optional[float] = Field(
        None, gt=0, description="Stop temperature; 1e-3 x initial when unset"
    )
    max_moves: int = Field(20_000, ge=0, description="Move budget per chain")
    seed: int = Field(0, ge=0)
    chains: int = Field(1, ge=1, description="Independent chains seeded seed, seed+1, ...")
    calibration_moves: int = Field(200, gt=0)
    target_acceptance: float = Field(0.8, gt=0, lt=1)


def load_sa_config(path: Union[str, Path], **overrides) -> SAConfig:
    """
    Read an SAConfig from a YAML or JSON file.

    Args:
        path: Configuration file
        **overrides: Field values taking precedence over the file

    Raises:
        FileNotFoundError: If the file does not exist
        ValueError: If the file holds unknown keys or out-of-range values
    """
    data = read_config_file(Path(path))
    data.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return SAConfig(**data)
    except ValidationError as exc:
        raise ValueError(f"invalid annealing configuration in {path}: {exc}") from exc


def default_sa_config(**overrides) -> SAConfig:
    """SAConfig from TFP_SA_CONFIG when set, else the defaults, with overrides."""
    settings = get_settings()
    if settings.sa_config_path is not None:
        return load_sa_config(settings.sa_config_path, **overrides)
    return SAConfig(**{k: v for k, v in overrides.items() if v is not None})


def calibrate_temperature(
    ctx: MoveContext, plan: Plan, rng: np.random.Generator, cfg: SAConfig
) -> float:
    """Temperature accepting about `target_acceptance` of sampled uphill moves."""
    uphill: List[float] = []
    cost = ctx.cost(plan)
    for nxt in random_walk(ctx, plan, rng, cfg.calibration_moves):
        nxt_cost = ctx.cost(nxt)
        if nxt_cost > cost:
            uphill.append(nxt_cost - cost)
        cost = nxt_cost
    if not uphill:
        return 1.0
    return -float(np.mean(uphill)) / math.log(cfg.target_acceptance)


def _run_chain(ctx: MoveContext, cfg: SAConfig, seed: int) -> Tuple[Plan, float, int]:
    inst = ctx.inst
    debug = get_settings().debug_feasibility
    rng = np.random.default_rng(seed)

    current = initial_plan(ctx)
    current_cost = ctx.cost(current)
    best, best_cost = current, current_cost
    if cfg.max_moves == 0:
        return best, best_cost, 0

    t0 = cfg.initial_temperature or calibrate_temperature(ctx, current, rng, cfg)
    t_min = cfg.min_temperature or 1e-3 * t0
    epoch = cfg.epoch_length or 100 * max(1, len(inst.shipments))

    temperature, moves = t0, 0
    while moves < cfg.max_moves and temperature >= t_min:
        accepted = 0
        for _ in range(epoch):
            if moves >= cfg.max_moves:
                break
            moves += 1
            candidate = neighbor(inst, current, rng, ctx)
            if candidate is current:
                continue
            cost = ctx.cost(candidate)
            delta = cost - current_cost
            if delta > 0 and rng.random() >= math.exp(-delta / temperature):
                continue
            if debug:
                require_feasible(inst, candidate, ctx.cache)
            current, current_cost = candidate, cost
            accepted += 1
            if (round(cost, 9), candidate.encode()) < (round(best_cost, 9), best.encode()):
                best, best_cost = candidate, cost
        logger.debug(
            "seed %d: T=%.4g accepted=%d best=%.6g", seed, temperature, accepted, best_cost
        )
        temperature *= cfg.cooling_ratio
    return best, best_cost, moves


def solve_sa(
    inst: Instance,
    cfg: Optional[SAConfig] = None,
    rigid: bool = False,
    cache: Optional[PathCache] = None,
) -> Solution:
    """
    Simulated annealing with Metropolis acceptance and geometric cooling.

    Structural rules hold in every visited state because each move repairs
    its result; capacities enter only through the penalties. Chains run
    independently (in a thread pool of TFP_WORKERS threads) and the best
    result is reduced by (total, seed).

    Args:
        inst: Problem instance
        cfg: Annealing schedule (defaults when None)
        rigid: Optimize against the rigid bounds and report rigid violations
        cache: PathCache of `inst`

    Returns:
        Solution: best plan visited; identical for identical inputs and seed

    Raises:
        InfeasibleInstanceError: If no structurally feasible initial plan exists
    """
    cfg = cfg or SAConfig()
    started = time.perf_counter()
    ctx = MoveContext(inst, cache, rigid=rigid)
    seeds = [cfg.seed + n for n in range(cfg.chains)]
    workers = min(get_settings().workers, len(seeds))

    with traced("solve_sa", chains=cfg.chains, seed=cfg.seed, rigid=rigid):
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(lambda s: _run_chain(ctx, cfg, s), seeds))
        else:
            results = [_run_chain(ctx, cfg, s) for s in seeds]

    runs = sorted(
        zip(seeds, results), key=lambda item: (round(item[1][1], 9), item[0])
    )
    seed, (plan, _, moves) = runs[0]
    elapsed = time.perf_counter() - started
    solution = build_solution(
        inst, plan, SOLVER_ID, ctx.cache, rigid=rigid, seed=seed, iterations=moves, wall_time=elapsed
    )
    logger.info(
        "annealing: %d chain(s) from seed %d, best seed %d after %d moves, total %.6g in %.2fs",
        cfg.chains, cfg.seed, seed, moves, solution.cost.total, elapsed,
    )
    return solution

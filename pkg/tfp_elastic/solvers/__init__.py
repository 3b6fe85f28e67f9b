"""Exact and simulated-annealing solvers."""

from .annealing import SAConfig, default_sa_config, load_sa_config, solve_sa
from .exact import ExactLimits, estimate_plans, solve_exact
from .moves import MoveContext, initial_plan, neighbor, repair
from .solution import Solution, build_solution

__all__ = [
    "SAConfig",
    "default_sa_config",
    "load_sa_config",
    "solve_sa",
    "ExactLimits",
    "estimate_plans",
    "solve_exact",
    "MoveContext",
    "initial_plan",
    "neighbor",
    "repair",
    "Solution",
    "build_solution",
]

"""Command-line interface: validate, solve, evaluate, stress and report.

Data documents go to stdout as sorted, indented JSON; diagnostics and logs
go to stderr. Exit status is 0 on success, 1 on domain errors and 2 on
usage errors.
"""

import argparse
import logging
import sys
from typing import Any, Callable, Dict, List, Optional, Sequence

from . import __version__
from .logging_config import configure_logging
from .observability import init_tracing
from .tools import evaluate, report, solve, stress, validate
from .tools.exports import dump_document

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_USAGE = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tfp-elastic",
        description="Train formation plan and traffic routing with elastic capacities",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", help="Logging level (default: LOG_LEVEL or INFO)")
    sub = parser.add_subparsers(dest="command", required=True)

    instance_help = "Instance JSON file, or @fig1, @fig2, @yardC"

    p = sub.add_parser("validate", help="Check an instance document")
    p.add_argument("instance", help=instance_help)

    p = sub.add_parser("solve", help="Optimize a plan")
    p.add_argument("instance", help=instance_help)
    p.add_argument("--solver", choices=solve.SOLVERS, default="sa")
    p.add_argument("--seed", type=int, help="Base seed of the annealing chains")
    p.add_argument("--chains", type=int, help="Independent annealing chains")
    p.add_argument("--max-moves", type=int, help="Move budget per chain")
    p.add_argument("--config", help="YAML/JSON annealing configuration")
    p.add_argument("--rigid", action="store_true", help="Rigid capacity mode")
    p.add_argument("--out", help="Directory for CSV tables")

    p = sub.add_parser("evaluate", help="Cost a fixed plan")
    p.add_argument("instance", help=instance_help)
    p.add_argument("plan", help="Plan JSON document")
    p.add_argument("--rigid", action="store_true", help="Rigid capacity mode")
    p.add_argument("--out", help="Directory for CSV tables")

    p = sub.add_parser("stress", help="Evaluate a plan under daily demand fluctuation")
    p.add_argument("instance", help=instance_help)
    p.add_argument("plan", help="Plan JSON document")
    p.add_argument("spec", help="Stress specification JSON document")
    p.add_argument("--days", type=int, help="Override the number of days")
    p.add_argument("--seed", type=int, help="Override the stress seed")
    p.add_argument("--out", help="Directory for stress_days.csv")

    p = sub.add_parser("report", help="Describe paths and strategies of an instance")
    p.add_argument("instance", help=instance_help)
    p.add_argument("--paths", action="store_true", help="List candidate paths of every service")
    p.add_argument("--strategies", nargs=2, metavar=("I", "J"), help="List strategy chains I->J")
    p.add_argument("--plan", help="Plan whose services form the strategy network")
    p.add_argument("--out", help="Directory for paths.csv")
    return parser


def _dispatch(args: argparse.Namespace) -> Dict[str, Any]:
    handlers: Dict[str, Callable[[], Dict[str, Any]]] = {
        "validate": lambda: validate.validate_instance_file(args.instance),
        "solve": lambda: solve.solve_instance(
            args.instance,
            solver=args.solver,
            seed=args.seed,
            chains=args.chains,
            max_moves=args.max_moves,
            config=args.config,
            rigid=args.rigid,
            out=args.out,
        ),
        "evaluate": lambda: evaluate.evaluate_plan_file(
            args.instance, args.plan, rigid=args.rigid, out=args.out
        ),
        "stress": lambda: stress.stress_plan_file(
            args.instance, args.plan, args.spec, days=args.days, seed=args.seed, out=args.out
        ),
        "report": lambda: report.report_instance(
            args.instance,
            paths=args.paths,
            strategies=args.strategies,
            plan_path=args.plan,
            out=args.out,
        ),
    }
    return handlers[args.command]()


def run(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run one CLI command.

    Args:
        argv: Arguments without the program name (sys.argv[1:] when None)

    Returns:
        int: exit status (0 success, 1 domain error, 2 usage error)
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE

    if args.log_level:
        configure_logging(args.log_level)

    try:
        result = _dispatch(args)
    except Exception as exc:
        logger.exception("%s failed", args.command, exc_info=exc)
        return EXIT_DOMAIN

    if not result.get("success"):
        print(f"error: {result.get('error')}", file=sys.stderr)
        for violation in result.get("violations", []):
            print(f"  {violation}", file=sys.stderr)
        return EXIT_DOMAIN

    if args.command == "validate":
        print(result["message"])
    else:
        print(dump_document(result["document"]))
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> None:
    """Console entry point."""
    configure_logging()
    init_tracing("tfp-elastic")
    sys.exit(run(argv))


if __name__ == "__main__":
    main()

"""
Unified handler namespace for tfp_elastic.

One module per CLI subcommand; every handler returns a result dictionary
with `success` and either `document` or `error`/`type`.

Example:
    from tfp_elastic.tools import solve
    result = solve.solve_instance("@yardC", solver="exact")
"""

from . import exports
from . import tools_evaluate as evaluate
from . import tools_report as report
from . import tools_solve as solve
from . import tools_stress as stress
from . import tools_validate as validate

__all__ = ["exports", "evaluate", "report", "solve", "stress", "validate"]

"""Exception hierarchy shared by the library and the CLI tool handlers."""

from typing import Any, List, Optional


class TFPError(Exception):
    """Base class for every domain error raised by tfp-elastic."""


class InstanceSchemaError(TFPError, ValueError):
    """Instance document does not match the schema."""

    def __init__(self, message: str, problems: Optional[List[str]] = None):
        super().__init__(message)
        self.problems = problems or []


class InstanceValidationError(TFPError, ValueError):
    """Instance parsed but violates one or more semantic invariants."""

    def __init__(self, report: Any):
        lines = "; ".join(str(v) for v in report.violations)
        super().__init__(f"instance is invalid: {lines}")
        self.report = report


class UnreachablePairError(TFPError, LookupError):
    """No physical path connects the requested yards."""

    def __init__(self, origin: str, destination: str, reason: str = "no path"):
        super().__init__(f"{origin}->{destination} unreachable: {reason}")
        self.origin = origin
        self.destination = destination


class StructuralInfeasibilityError(TFPError, ValueError):
    """Plan breaks the partition, support, path, mandate or acyclicity rules."""

    def __init__(self, violations: List[Any]):
        shown = "; ".join(str(v) for v in violations[:5])
        more = f" (+{len(violations) - 5} more)" if len(violations) > 5 else ""
        super().__init__(f"plan is structurally infeasible: {shown}{more}")
        self.violations = list(violations)


class CyclicPlanError(StructuralInfeasibilityError):
    """Deferral relation of a plan contains a cycle."""


class EnumerationCapExceeded(TFPError, RuntimeError):
    """Exact solver refuses an instance whose search space exceeds the caps."""

    def __init__(self, estimate: float, cap: float, reason: str = "plans"):
        super().__init__(
            f"exact enumeration refused: estimated {estimate:.3g} {reason} exceeds cap {cap:.3g}"
        )
        self.estimate = estimate
        self.cap = cap


class InfeasibleInstanceError(TFPError, RuntimeError):
    """No structurally feasible plan exists for the instance."""


class PlanDocumentError(TFPError, ValueError):
    """Plan document is malformed or refers to unknown yards."""


class StressSpecError(TFPError, ValueError):
    """Stress specification document is malformed."""

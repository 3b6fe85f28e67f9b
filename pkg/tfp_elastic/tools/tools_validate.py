"""Instance validation handler."""

import logging
from typing import Any, Dict

from ..errors import InstanceSchemaError, InstanceValidationError, TFPError
from ..instance import resolve_instance

logger = logging.getLogger(__name__)


def validate_instance_file(ref: str) -> Dict[str, Any]:
    """
    Parse and validate an instance file or `@fixture`.

    Args:
        ref: Instance path, or `@fig1`, `@fig2`, `@yardC`

    Returns:
        Dictionary with `success`, and on success the instance size; on
        failure `error`, `type` and the list of `violations`
    """
    try:
        inst = resolve_instance(ref)
        return {
            "success": True,
            "message": "OK",
            "yards": len(inst.yards),
            "links": len(inst.links),
            "shipments": len(inst.shipments),
        }
    except InstanceValidationError as e:
        return {
            "success": False,
            "error": str(e),
            "type": type(e).__name__,
            "violations": [str(v) for v in e.report.violations],
        }
    except InstanceSchemaError as e:
        return {
            "success": False,
            "error": str(e),
            "type": type(e).__name__,
            "violations": list(e.problems),
        }
    except (TFPError, FileNotFoundError) as e:
        return {
            "success": False,
            "error": str(e),
            "type": type(e).__name__,
            "violations": [],
        }

"""Entry point for running the CLI as a module.

    python -m tfp_elastic solve @yardC --solver exact
"""

import logging
import sys

from .logging_config import configure_logging

# Configure logging before any command runs
configure_logging()
logger = logging.getLogger(__name__)

from .main import main  # noqa: E402

if __name__ == "__main__":
    try:
        main()
    except SystemExit:
        raise
    except Exception as exc:
        logger.exception("tfp-elastic failed", exc_info=exc)
        sys.exit(1)

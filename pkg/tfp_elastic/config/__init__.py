"""
Unified config namespace for tfp_elastic.

Re-exports the settings helpers under a stable namespace so callers do not
depend on the module layout.

Example:
    from tfp_elastic.config import get_settings, clear_settings_cache
"""

from ..config_base import (
    Settings,
    clear_settings_cache,
    get_settings,
    read_config_file,
)

__all__ = [
    "Settings",
    "get_settings",
    "clear_settings_cache",
    "read_config_file",
]

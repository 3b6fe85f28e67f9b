"""Runtime settings for solvers, evaluation and the CLI."""

import os
from functools import lru_cache
from pathlib import Path
from typing import Any, Optional

import yaml
from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field

# Load environment variables from a working-directory .env.local.
# Lets each checkout pin its solver caps and debug switches independently.
try:
    load_dotenv(Path.cwd() / ".env.local")
except Exception:
    pass


_TRUE = ("1", "true", "yes", "on")


class Settings(BaseModel):
    """Process-wide switches read from the environment."""

    model_config = ConfigDict(frozen=True)

    fractional_trains: bool = Field(False, description="Use D/m instead of ceil(D/m) for link loads")
    debug_feasibility: bool = Field(False, description="Re-check every accepted annealing state")
    exact_max_plans: int = Field(2_000_000, gt=0, description="Exact solver plan cap")
    exact_max_yards: int = Field(8, gt=0, description="Exact solver yard cap")
    sa_config_path: Optional[Path] = Field(None, description="Default SAConfig file")
    workers: int = Field(1, ge=1, description="Thread pool size for chains and stress days")
    output_dir: Optional[Path] = Field(None, description="Default directory for CSV tables")


def _env_flag(name: str, default: bool = False) -> bool:
    raw = os.getenv(name)
    if raw is None:
        return default
    return raw.strip().lower() in _TRUE


def _env_path(name: str) -> Optional[Path]:
    raw = os.getenv(name)
    if not raw:
        return None
    return Path(os.path.expanduser(raw))


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """
    Get settings from the environment.

    Reads TFP_FRACTIONAL_TRAINS, TFP_DEBUG_FEASIBILITY, TFP_EXACT_MAX_PLANS,
    TFP_EXACT_MAX_YARDS, TFP_SA_CONFIG, TFP_WORKERS and TFP_OUTPUT_DIR.
    The result is cached; call clear_settings_cache() after changing the
    environment.

    Returns:
        Settings: frozen settings object

    Raises:
        pydantic.ValidationError: If a numeric variable is out of range

    Example:
        >>> settings = get_settings()
        >>> settings.exact_max_yards
        8
    """
    return Settings(
        fractional_trains=_env_flag("TFP_FRACTIONAL_TRAINS"),
        debug_feasibility=_env_flag("TFP_DEBUG_FEASIBILITY"),
        exact_max_plans=int(os.getenv("TFP_EXACT_MAX_PLANS", "2000000")),
        exact_max_yards=int(os.getenv("TFP_EXACT_MAX_YARDS", "8")),
        sa_config_path=_env_path("TFP_SA_CONFIG"),
        workers=int(os.getenv("TFP_WORKERS", "1")),
        output_dir=_env_path("TFP_OUTPUT_DIR"),
    )


def clear_settings_cache() -> None:
    """
    Clear the settings cache.

    Useful when environment variables have been changed in-process
    (tests use it together with monkeypatch.setenv).
    """
    get_settings.cache_clear()


def read_config_file(path: Path) -> dict[str, Any]:
    """
    Read a YAML (or JSON) configuration file into a dictionary.

    Args:
        path: File to read

    Returns:
        dict: Parsed mapping (empty file gives an empty dict)

    Raises:
        FileNotFoundError: If the file does not exist
        ValueError: If the top level is not a mapping
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"configuration file not found at {path}")

    with open(path, "r", encoding="utf-8") as f:
        data = yaml.safe_load(f)

    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ValueError(f"configuration file {path} must contain a mapping")
    return data

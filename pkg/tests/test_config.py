"""Settings, configuration files, logging and tracing switches."""

import logging
import sys
from pathlib import Path

import pytest
from pydantic import ValidationError

from tfp_elastic.config import get_settings, read_config_file
from tfp_elastic.logging_config import configure_logging
from tfp_elastic.observability import get_otel_status, traced


def test_default_settings(monkeypatch):
    for name in (
        "TFP_FRACTIONAL_TRAINS",
        "TFP_DEBUG_FEASIBILITY",
        "TFP_EXACT_MAX_PLANS",
        "TFP_EXACT_MAX_YARDS",
        "TFP_SA_CONFIG",
        "TFP_WORKERS",
        "TFP_OUTPUT_DIR",
    ):
        monkeypatch.delenv(name, raising=False)
    settings = get_settings()
    assert settings.fractional_trains is False
    assert settings.exact_max_plans == 2_000_000
    assert settings.exact_max_yards == 8
    assert settings.workers == 1
    assert settings.output_dir is None


def test_settings_from_environment(settings_env, tmp_path):
    settings_env(
        TFP_FRACTIONAL_TRAINS="yes",
        TFP_DEBUG_FEASIBILITY="on",
        TFP_WORKERS="4",
        TFP_OUTPUT_DIR=str(tmp_path),
    )
    settings = get_settings()
    assert settings.fractional_trains
    assert settings.debug_feasibility
    assert settings.workers == 4
    assert settings.output_dir == Path(tmp_path)
    assert get_settings() is settings


def test_out_of_range_setting(settings_env):
    settings_env(TFP_WORKERS="0")
    with pytest.raises(ValidationError):
        get_settings()


def test_read_config_file(tmp_path):
    path = tmp_path / "cfg.yaml"
    path.write_text("")
    assert read_config_file(path) == {}
    path.write_text('{"seed": 3}')
    assert read_config_file(path) == {"seed": 3}
    path.write_text("- 1\n- 2\n")
    with pytest.raises(ValueError):
        read_config_file(path)
    with pytest.raises(FileNotFoundError):
        read_config_file(tmp_path / "missing.yaml")


def test_configure_logging_targets_stderr():
    configure_logging("debug")
    root = logging.getLogger()
    assert root.level == logging.DEBUG
    assert len(root.handlers) == 1
    assert root.handlers[0].stream is sys.stderr
    configure_logging("warning")


def test_tracing_is_off_without_endpoint(monkeypatch):
    monkeypatch.delenv("OTEL_EXPORTER_OTLP_ENDPOINT", raising=False)
    status = get_otel_status()
    assert status["enabled"] is False
    assert status["mode"] == "none"
    with traced("noop", days=3) as span:
        assert span is None

import logging

import pytest

from src.config import SettingsError, configure_logging, get_settings
from src.ita.lpreach import bounded_reach


def _fresh():
    get_settings.cache_clear()
    return get_settings()


def test_defaults():
    settings = _fresh()
    assert settings.port == 8080
    assert settings.max_classes == 200000
    assert settings.depth == 64
    assert settings.tctl_depth == 12
    assert settings.storage_type == "memory"


def test_environment_overrides(monkeypatch):
    monkeypatch.setenv("PORT", "9000")
    monkeypatch.setenv("ITA_MAX_STATES", "10")
    monkeypatch.setenv("ITA_TCTL_DEPTH", "3")
    settings = _fresh()
    assert (settings.port, settings.max_states, settings.tctl_depth) == (9000, 10, 3)


def test_empty_values_fall_back_to_defaults(monkeypatch):
    monkeypatch.setenv("ITA_DEPTH", "")
    assert _fresh().depth == 64


@pytest.mark.parametrize("variable, value", [
    ("ITA_DEPTH", "0"),
    ("ITA_MAX_CLASSES", "many"),
    ("STORAGE_TYPE", "redis"),
    ("PORT", "70000"),
])
def test_invalid_values(monkeypatch, variable, value):
    monkeypatch.setenv(variable, value)
    with pytest.raises(SettingsError, match=variable):
        _fresh()


def test_settings_feed_search_defaults(monkeypatch, a1):
    monkeypatch.setenv("ITA_DEPTH", "1")
    get_settings.cache_clear()
    found = bounded_reach(a1, "q2")
    assert not found.hit
    assert not found.complete


def test_configure_logging_accepts_names():
    configure_logging("debug")
    configure_logging("not-a-level")
    assert logging.getLogger().handlers


def test_jobs_setting(monkeypatch):
    assert _fresh().jobs == 1
    monkeypatch.setenv("ITA_JOBS", "4")
    assert _fresh().jobs == 4
    monkeypatch.setenv("ITA_JOBS", "0")
    with pytest.raises(SettingsError, match="ITA_JOBS"):
        _fresh()

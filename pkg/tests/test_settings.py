"""Tests for environment-driven settings."""

import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
SRC = ROOT / "src"
for p in (SRC, ROOT):
    if str(p) not in sys.path:
        sys.path.insert(0, str(p))

import pytest
from pydantic import ValidationError

from teich.config.settings import Settings, get_settings


@pytest.fixture(autouse=True)
def fresh_settings():
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


def test_defaults(monkeypatch):
    for name in ("TEICH_SEED", "TEICH_THREADS", "TEICH_TOLERANCE", "TEICH_DEDEKIND_CUTOFF"):
        monkeypatch.delenv(name, raising=False)
    settings = Settings()
    assert settings.threads == 1
    assert settings.tolerance == 1e-9
    assert settings.tail_tol == 1e-14
    assert settings.dedekind_cutoff == 5000.0


def test_environment_prefix(monkeypatch):
    monkeypatch.setenv("TEICH_SEED", "7")
    monkeypatch.setenv("TEICH_THREADS", "4")
    monkeypatch.setenv("TEICH_DEDEKIND_CUTOFF", "800")
    settings = get_settings()
    assert settings.seed == 7
    assert settings.threads == 4
    assert settings.dedekind_cutoff == 800.0
    assert get_settings() is settings


def test_invalid_values_are_rejected(monkeypatch):
    monkeypatch.setenv("TEICH_THREADS", "0")
    with pytest.raises(ValidationError):
        Settings()

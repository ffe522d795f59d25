"""Pytest configuration and fixtures."""

from pathlib import Path

import numpy as np
import pytest

from src.client.gan.mixture import MixtureSpec
from src.framework.nn.mlp import MlpModel

PRESETS_PATH = Path(__file__).resolve().parent.parent / "resources" / "presets"


@pytest.fixture
def rng():
    """A seeded generator, fresh for every test."""
    return np.random.default_rng(1234)


@pytest.fixture
def mixture_spec():
    """The default eight-mode ring."""
    return MixtureSpec()


@pytest.fixture
def small_mlp(rng):
    """A two-hidden-layer network small enough for finite differences."""
    return MlpModel.init([2, 6, 5, 3], rng)


@pytest.fixture
def presets_path():
    """The repository's preset directory."""
    return PRESETS_PATH


@pytest.fixture
def settings_env(monkeypatch, tmp_path):
    """Point the settings at a temporary output directory and the real presets."""
    from src.cli.config import get_settings

    monkeypatch.setenv("FLOWLAB_OUT_DIR", str(tmp_path / "runs"))
    monkeypatch.setenv("FLOWLAB_PRESETS_PATH", str(PRESETS_PATH))
    monkeypatch.setenv("FLOWLAB_LOG_LEVEL", "WARNING")
    get_settings.cache_clear()
    yield tmp_path / "runs"
    get_settings.cache_clear()

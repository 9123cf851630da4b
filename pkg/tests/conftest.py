# tests/conftest.py
import numpy as np
import pytest

from app.models import Geometry
from app.utils import load_defaults


@pytest.fixture
def reference() -> Geometry:
    return Geometry(l0=9, l1=8, l2=5, l3=5, l4=8)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240501)


@pytest.fixture(autouse=True)
def _clean_env(monkeypatch):
    for name in ("FIVEBAR_WORKERS", "FIVEBAR_OUTPUT_DIR", "FIVEBAR_LOG_FILE"):
        monkeypatch.delenv(name, raising=False)
    load_defaults.cache_clear()

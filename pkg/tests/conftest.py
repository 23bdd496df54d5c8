"""Fixtures compartidos para tests."""

import sys
import os
import pytest

# Asegurar que el directorio raíz del proyecto esté en el path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from models.chain_spec import ChainSpec, Family  # noqa: E402
from models.coupling_table import ComputeConfig  # noqa: E402

FIXTURES_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "fixtures")


@pytest.fixture
def fixtures_dir():
    return FIXTURES_DIR


@pytest.fixture
def stub1():
    return ChainSpec(family=Family.STUB, n=1, alpha=1.0, JS=1.0)


@pytest.fixture
def stub1_weak():
    return ChainSpec(family=Family.STUB, n=1, alpha=0.3, JS=0.1)


@pytest.fixture
def diamond1():
    return ChainSpec(family=Family.DIAMOND, n=1, JS=1.0)


@pytest.fixture
def small_config():
    """Malla chica: suficiente para propiedades exactas (signos, sumas, equivalencias)."""
    return ComputeConfig(num_k=32)


@pytest.fixture(autouse=True)
def single_worker(monkeypatch):
    monkeypatch.setenv("FLATBAND_WORKERS", "1")

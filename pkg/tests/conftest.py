import json
import os
import sys

import numpy as np
import pytest

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if ROOT not in sys.path:
    sys.path.insert(0, ROOT)

from models import DoubleWellConfig, DoubleWellParams, prepare_system  # noqa: E402
from models.qubit import build_qubit_damping  # noqa: E402


@pytest.fixture(scope="session")
def shallow_system():
    """Closed shallow well (c4=0.05, c2=0.35) on the default grid, rank 16."""
    return prepare_system(DoubleWellConfig())


@pytest.fixture(scope="session")
def deep_system():
    return prepare_system(DoubleWellConfig(params=DoubleWellParams(c2=0.5), rank=8))


@pytest.fixture
def damping_model():
    return build_qubit_damping(1.0)


@pytest.fixture
def excited_qubit():
    """|up><up|"""
    return np.diag([1.0, 0.0]).astype(complex)


@pytest.fixture
def write_config(tmp_path):
    """Write a config dict to tmp_path and return its path."""

    def _write(data, name="run.json"):
        path = tmp_path / name
        path.write_text(json.dumps(data, indent=2), encoding="utf-8")
        return str(path)

    return _write

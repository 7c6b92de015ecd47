import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from membranecalc.gennum import EpsilonGrid

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

DATA = os.path.join(os.path.dirname(__file__), os.pardir, "data")


@pytest.fixture(scope="session")
def grid():
    return EpsilonGrid.default()


@pytest.fixture(scope="session")
def eps(grid):
    return grid.samples


def data_file(name: str) -> str:
    return os.path.abspath(os.path.join(DATA, name))


def rel_err(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return np.max(np.abs(a - b) / np.maximum(1.0, np.abs(b)))

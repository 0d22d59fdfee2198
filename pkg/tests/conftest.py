import os
import sys

import numpy as np
import pytest

SRC_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'src')
if SRC_DIR not in sys.path:
    sys.path.insert(0, SRC_DIR)

from constraint import ConstraintSolver  # noqa: E402
from grid import Grid1D  # noqa: E402
from operators import assemble_operators  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope='session')
def grid64():
    return Grid1D(64)


@pytest.fixture(scope='session')
def ops64(grid64):
    return assemble_operators(grid64)


@pytest.fixture(scope='session')
def ops128():
    return assemble_operators(Grid1D(128))


@pytest.fixture(scope='session')
def ops16():
    return assemble_operators(Grid1D(16))


@pytest.fixture(scope='session')
def solver64(ops64):
    return ConstraintSolver(ops64, sign=-1)


@pytest.fixture(scope='session')
def solver16(ops16):
    return ConstraintSolver(ops16, sign=-1)

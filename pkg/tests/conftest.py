import numpy as np
import pytest

from prostar import _tol


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(autouse=True)
def _reset_tolerance():
    old = _tol.scale()
    yield
    _tol.set_scale(old)

"""Shared fixtures and helpers for the test suite."""

import numpy as np
import pytest

from ldglimit.geometry import MaterialParams
from ldglimit.tensor_algebra import qtensor


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def unit_params():
    return MaterialParams(a2=1.0, b2=1.0, c2=1.0)


def random_qtensors(rng, n, scale=1.0):
    """Random symmetric traceless matrices, shape (n, 3, 3)."""
    return qtensor(rng.normal(scale=scale, size=(n, 3, 3)))


def random_directors(rng, n):
    v = rng.normal(size=(n, 3))
    return v / np.linalg.norm(v, axis=-1, keepdims=True)

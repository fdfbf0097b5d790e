import numpy as np
import pytest

from wigosc import ModelParams, derive


@pytest.fixture
def d_default():
    """Dimensionless groups for the standard mid-temperature, light-damping run."""
    return derive(ModelParams.from_dimensionless(5.0, 0.05))


@pytest.fixture
def d_free():
    """Frictionless run with explicit noise strength."""
    return derive(ModelParams.from_dimensionless(0.0, 0.0, 0.25))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)

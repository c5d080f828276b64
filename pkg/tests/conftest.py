import numpy as np
import pytest

from translayer import quartic_well


@pytest.fixture
def rng():
    return np.random.default_rng(20260814)


@pytest.fixture
def well_sym():
    """The symmetric quartic with wells at -1 and 1."""
    return quartic_well(-1.0, 1.0, 1.0)


@pytest.fixture
def well_01():
    return quartic_well(0.0, 1.0, 1.0)

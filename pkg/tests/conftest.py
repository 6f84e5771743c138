import numpy as np
import pytest

from orislink.params import SystemParams


@pytest.fixture
def table1() -> SystemParams:
    """Default operating point (reference pointing exponent)."""
    return SystemParams()


@pytest.fixture
def table1_sc() -> SystemParams:
    """Default operating point with the sampler-consistent pointing exponent."""
    return SystemParams(geometry_mode="self-consistent")


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240811)

import numpy as np
import pytest

from latentdoor.numerics import Conv2d, Linear


@pytest.fixture(name="rng")
def rng_fixture():
    return np.random.default_rng(1234)


@pytest.fixture(name="conv")
def conv_fixture(rng):
    """A strided, padded float64 convolution."""
    return Conv2d.create(2, 3, 3, stride=2, padding=1, rng=rng, dtype=np.float64)


@pytest.fixture(name="linear")
def linear_fixture(rng):
    return Linear.create(5, 4, rng=rng, dtype=np.float64)

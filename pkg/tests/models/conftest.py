import numpy as np
import pytest

from latentdoor.models import build_preset
from latentdoor.numerics import Precision


@pytest.fixture(name="tiny_net")
def tiny_net_fixture():
    """Double-precision MicroNet on 1x8x8 inputs with three classes."""
    return build_preset("micronet", (1, 8, 8), 3, seed=3, precision=Precision.DOUBLE)


@pytest.fixture(name="desk_net")
def desk_net_fixture():
    return build_preset("micronet", (3, 16, 16), 4, seed=0)


@pytest.fixture(name="images")
def images_fixture():
    return np.random.default_rng(5).uniform(0.0, 1.0, size=(4, 1, 8, 8))

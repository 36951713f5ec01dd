import pytest

from latentdoor.data import synth_splits
from latentdoor.models import build_preset


@pytest.fixture(name="splits")
def splits_fixture():
    """Train, val and test splits of 3x8x8 blobs, four classes."""
    return synth_splits(4, 16, 10, 10, (3, 8, 8), seed=17)


@pytest.fixture(name="initial")
def initial_fixture():
    return build_preset("micronet", (3, 8, 8), 4, seed=2)

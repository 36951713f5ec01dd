import numpy as np
import pytest

from latentdoor.data import Dataset, Split, synth_dataset


@pytest.fixture(name="small_set")
def small_set_fixture():
    """Four classes of 3x16x16 synthetic images, 10 per class."""
    return synth_dataset(4, 10, (3, 16, 16), seed=21)


@pytest.fixture(name="grey_set")
def grey_set_fixture():
    rng = np.random.default_rng(4)
    images = rng.uniform(0.0, 1.0, size=(12, 1, 8, 8)).astype(np.float32)
    return Dataset(images, np.arange(12) % 3, 3, Split.VAL)

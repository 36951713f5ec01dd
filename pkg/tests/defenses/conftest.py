import pytest

from latentdoor.data import Split, TriggerSpec, synth_dataset
from latentdoor.models import build_preset
from latentdoor.numerics import Precision
from latentdoor.probe import estimate_direction
from latentdoor.training import TrainConfig
from latentdoor.training import train as fit_network


@pytest.fixture(name="train")
def train_fixture():
    return synth_dataset(4, 10, (3, 8, 8), seed=12)


@pytest.fixture(name="test_set")
def test_set_fixture():
    return synth_dataset(4, 10, (3, 8, 8), seed=13, split=Split.TEST)


@pytest.fixture(name="net")
def net_fixture(test_set):
    """MicroNet fitted on ``test_set`` so that most of its samples are classified correctly."""
    initial = build_preset("micronet", (3, 8, 8), 4, seed=5, precision=Precision.DOUBLE)
    net, _ = fit_network(
        initial, test_set, test_set, TrainConfig(epochs=20, batch_size=8, lr=0.05)
    )
    return net


@pytest.fixture(name="spec")
def spec_fixture():
    return TriggerSpec.badnets(3, target_label=1)


@pytest.fixture(name="direction")
def direction_fixture(net, test_set, spec):
    return estimate_direction(net, test_set, spec)

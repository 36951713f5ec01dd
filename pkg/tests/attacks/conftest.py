import pytest

from latentdoor.data import Split, TriggerSpec, synth_dataset
from latentdoor.models import build_preset
from latentdoor.numerics import Precision
from latentdoor.probe import estimate_direction
from latentdoor.training import TrainConfig
from latentdoor.training import train as fit_network


@pytest.fixture(name="samples")
def samples_fixture():
    return synth_dataset(4, 10, (3, 8, 8), seed=11, split=Split.VAL)


@pytest.fixture(name="net")
def net_fixture(samples):
    """MicroNet fitted on ``samples`` so that most of them are classified correctly."""
    initial = build_preset("micronet", (3, 8, 8), 4, seed=5, precision=Precision.DOUBLE)
    net, _ = fit_network(initial, samples, samples, TrainConfig(epochs=20, batch_size=8, lr=0.05))
    return net


@pytest.fixture(name="direction")
def direction_fixture(net, samples):
    return estimate_direction(net, samples, TriggerSpec.badnets(3, target_label=1))

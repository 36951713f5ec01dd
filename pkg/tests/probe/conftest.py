import pytest

from latentdoor.data import Split, TriggerSpec, synth_dataset
from latentdoor.models import build_preset
from latentdoor.numerics import Precision
from latentdoor.probe import estimate_direction
from latentdoor.training import TrainConfig
from latentdoor.training import train as fit_network


@pytest.fixture(name="val")
def val_fixture():
    return synth_dataset(4, 10, (3, 8, 8), seed=3, split=Split.VAL)


@pytest.fixture(name="net")
def net_fixture(val):
    """MicroNet fitted on ``val`` so that most of its samples are classified correctly."""
    initial = build_preset("micronet", (3, 8, 8), 4, seed=4, precision=Precision.DOUBLE)
    net, _ = fit_network(initial, val, val, TrainConfig(epochs=20, batch_size=8, lr=0.05))
    return net


@pytest.fixture(name="spec")
def spec_fixture():
    return TriggerSpec.badnets(3, target_label=0)


@pytest.fixture(name="direction")
def direction_fixture(net, val, spec):
    return estimate_direction(net, val, spec)

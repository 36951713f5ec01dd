"""Trigger unlearning and its adversarial-source variant."""

import numpy as np
import pytest

from latentdoor.attacks import AdversarialSet
from latentdoor.defenses import UnlearnConfig, mixed_epoch, unlearn_trigger
from latentdoor.errors import InvalidConfigError, ShapeMismatchError


@pytest.mark.parametrize(
    "changes, message",
    [
        ({"epochs": -1}, "epochs"),
        ({"triggered_fraction": 0.0}, "triggered_fraction"),
        ({"triggered_fraction": 1.5}, "triggered_fraction"),
        ({"batch_size": 0}, "batch_size"),
        ({"lr": float("nan")}, "lr"),
        ({"momentum": 1.0}, "momentum"),
    ],
)
def test_rejected_settings(changes, message):
    with pytest.raises(InvalidConfigError, match=message):
        UnlearnConfig(**changes)


class TestMixedEpoch:
    def test_trigger_source_keeps_labels(self, train, spec):
        images, labels = mixed_epoch(train, spec, 0.25, np.random.default_rng(0))
        np.testing.assert_array_equal(labels, train.labels)
        changed = np.any(images != train.images, axis=(1, 2, 3))
        assert changed.sum() == 10

    def test_adversarial_source_brings_its_labels(self, train):
        source = AdversarialSet(
            np.full((2, 3, 8, 8), 0.5, dtype=np.float32), np.array([3, 3]), np.array([7, 9])
        )
        images, labels = mixed_epoch(train, source, 1.0, np.random.default_rng(0))
        swapped = np.all(images == 0.5, axis=(1, 2, 3))
        assert swapped.sum() == 2
        np.testing.assert_array_equal(labels[swapped], [3, 3])

    def test_same_generator_same_epoch(self, train, spec):
        a = mixed_epoch(train, spec, 0.1, np.random.default_rng(4))
        b = mixed_epoch(train, spec, 0.1, np.random.default_rng(4))
        np.testing.assert_array_equal(a[0], b[0])


def test_zero_epochs_return_an_equal_copy(net, train, spec):
    model, history = unlearn_trigger(net, train, spec, UnlearnConfig(epochs=0))
    assert model is not net
    for (_, a), (_, b) in zip(model.parameters(), net.parameters()):
        np.testing.assert_array_equal(a, b)
    assert len(history) == 0


def test_fine_tuning_leaves_the_input_untouched(net, train, test_set, spec):
    before = [p.copy() for _, p in net.parameters()]
    cfg = UnlearnConfig(epochs=2, batch_size=8, lr=0.05, seed=3)
    model, history = unlearn_trigger(net, train, spec, cfg, val=test_set)
    for (_, p), original in zip(net.parameters(), before):
        np.testing.assert_array_equal(p, original)
    assert any(
        not np.array_equal(a, b) for (_, a), (_, b) in zip(model.parameters(), net.parameters())
    )
    assert history.epoch == [0, 1]
    assert all(0.0 <= asr <= 1.0 for asr in history.val_asr)


def test_reproducible(net, train, spec):
    cfg = UnlearnConfig(epochs=1, batch_size=8, seed=5)
    first, _ = unlearn_trigger(net, train, spec, cfg)
    second, _ = unlearn_trigger(net, train, spec, cfg)
    for (_, a), (_, b) in zip(first.parameters(), second.parameters()):
        np.testing.assert_array_equal(a, b)


def test_adversarial_images_must_fit(net, train):
    source = AdversarialSet(np.zeros((2, 1, 8, 8)), np.array([0, 1]), np.array([0, 1]))
    with pytest.raises(ShapeMismatchError, match="Adversarial images"):
        unlearn_trigger(net, train, source)

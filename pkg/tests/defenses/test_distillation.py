"""Attention maps and attention-guided distillation."""

import numpy as np
import pytest

from latentdoor.defenses import (
    DistillConfig,
    attention_map,
    attention_map_backward,
    default_attention_layers,
    distill_repair,
    distillation_gradients,
)
from latentdoor.errors import ArchitectureMismatchError, InvalidConfigError, ShapeMismatchError
from latentdoor.models import build_preset
from latentdoor.numerics import Precision, finite_difference_grad, relative_error


class TestAttentionMap:
    def test_unit_norm_per_sample(self):
        features = np.random.default_rng(0).standard_normal((3, 4, 5, 5))
        maps = attention_map(features)
        assert maps.shape == (3, 5, 5)
        np.testing.assert_allclose(np.linalg.norm(maps.reshape(3, -1), axis=1), 1.0)
        assert np.all(maps >= 0)

    def test_single_activation(self):
        features = np.random.default_rng(1).standard_normal((2, 3, 3))
        np.testing.assert_allclose(attention_map(features), attention_map(features[None])[0])

    def test_zero_activation(self):
        np.testing.assert_array_equal(attention_map(np.zeros((1, 2, 3, 3))), 0.0)

    def test_rank(self):
        with pytest.raises(ShapeMismatchError):
            attention_map(np.zeros((2, 3)))

    def test_backward_matches_central_differences(self):
        rng = np.random.default_rng(2)
        features = rng.standard_normal((2, 3, 4, 4))
        upstream = rng.standard_normal((2, 4, 4))
        analytic = attention_map_backward(features, upstream)
        numeric = finite_difference_grad(
            lambda a: float(np.sum(attention_map(a) * upstream)), features, step=1e-6
        )
        assert relative_error(analytic, numeric) < 1e-6

    def test_zero_maps_get_no_gradient(self):
        grad = attention_map_backward(np.zeros((1, 2, 3, 3)), np.ones((1, 3, 3)))
        np.testing.assert_array_equal(grad, 0.0)


def test_attention_layers_follow_convolutions(net):
    assert default_attention_layers(net) == (1, 3)


@pytest.mark.parametrize(
    "changes, message",
    [
        ({"lambda_attn": -1.0}, "lambda_attn"),
        ({"epochs": -1}, "epochs"),
        ({"batch_size": 0}, "batch_size"),
        ({"lr": -0.1}, "lr"),
    ],
)
def test_rejected_settings(changes, message):
    with pytest.raises(InvalidConfigError, match=message):
        DistillConfig(**changes)


def test_gradients_match_central_differences(net, train):
    teacher = build_preset("micronet", (3, 8, 8), 4, seed=8, precision=Precision.DOUBLE)
    images, labels = train.images[:4], train.labels[:4]
    names = [name for name, _ in net.parameters()]
    index = names.index("2.bias")
    _, grads = distillation_gradients(net, teacher, images, labels, 0.5, (1, 3))

    def loss(value):
        params = [p.copy() for _, p in net.parameters()]
        params[index] = value
        student = net.with_parameters(params)
        return distillation_gradients(student, teacher, images, labels, 0.5, (1, 3))[0]

    numeric = finite_difference_grad(loss, net.parameters()[index][1], step=1e-6)
    assert relative_error(grads[index], numeric) < 1e-4


def test_repair_fine_tunes_a_copy(net, train):
    teacher = build_preset("micronet", (3, 8, 8), 4, seed=8, precision=Precision.DOUBLE)
    before = [p.copy() for _, p in net.parameters()]
    model, history = distill_repair(
        net, teacher, train, DistillConfig(epochs=1, batch_size=8, lr=0.05)
    )
    for (_, p), original in zip(net.parameters(), before):
        np.testing.assert_array_equal(p, original)
    assert model.architecture_signature() == net.architecture_signature()
    assert len(history) == 1
    assert np.isfinite(history.train_loss[0])


def test_teacher_must_share_the_architecture(net, train):
    teacher = build_preset("micronet", (3, 8, 8), 5, seed=8, precision=Precision.DOUBLE)
    with pytest.raises(ArchitectureMismatchError, match="differ"):
        distill_repair(net, teacher, train, DistillConfig(epochs=1))


def test_attention_layers_must_exist(net, train):
    teacher = net.copy()
    with pytest.raises(InvalidConfigError, match="outside"):
        distill_repair(net, teacher, train, DistillConfig(epochs=1, attention_layers=(42,)))
    with pytest.raises(ShapeMismatchError, match="attention"):
        distill_repair(net, teacher, train, DistillConfig(epochs=1, attention_layers=(5,)))

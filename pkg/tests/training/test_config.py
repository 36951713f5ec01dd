"""Training hyperparameters, history and the SGD update."""

import numpy as np
import pytest

from latentdoor.errors import InvalidConfigError, ShapeMismatchError
from latentdoor.training import SGD, TrainConfig, TrainHistory


def test_step_schedule():
    cfg = TrainConfig(lr=0.1, lr_milestones=(2, 4), lr_gamma=0.5)
    assert [cfg.learning_rate_at(e) for e in range(5)] == pytest.approx(
        [0.1, 0.1, 0.05, 0.05, 0.025]
    )


def test_milestones_from_a_list_become_a_tuple():
    assert TrainConfig(lr_milestones=[3, 6]).lr_milestones == (3, 6)


def test_zero_lr_and_negative_decay_are_accepted():
    cfg = TrainConfig(lr=0.0, weight_decay=-1e-3)
    assert cfg.learning_rate_at(0) == 0.0


@pytest.mark.parametrize(
    "changes,match",
    [
        ({"epochs": 0}, "epochs"),
        ({"batch_size": 0}, "batch_size"),
        ({"lr": -0.1}, "lr"),
        ({"momentum": 1.0}, "momentum"),
        ({"lr_milestones": (5, 3)}, "lr_milestones"),
        ({"early_stop_patience": 0}, "early_stop_patience"),
    ],
)
def test_invalid_settings(changes, match):
    with pytest.raises(InvalidConfigError, match=match):
        TrainConfig(**changes)


def test_history_records_epochs():
    history = TrainHistory()
    history.record(0, 1.5, 0.25, float("nan"), 0.01)
    history.record(1, 1.2, 0.5, 0.9, 0.01)
    assert len(history) == 2
    assert history.val_acc == [0.25, 0.5]
    assert np.isnan(history.val_asr[0])


class TestSGD:
    def test_momentum_and_weight_decay(self):
        weight = np.array([1.0, -2.0])
        bias = np.array([0.5])
        params = [("0.weight", weight), ("0.bias", bias)]
        optimizer = SGD(momentum=0.5, weight_decay=0.1)

        optimizer.step(params, [np.array([1.0, 1.0]), np.array([1.0])], lr=0.1)
        np.testing.assert_allclose(weight, [1.0 - 0.1 * 1.1, -2.0 - 0.1 * 0.8])
        np.testing.assert_allclose(bias, [0.4])

        first_velocity = np.array([1.1, 0.8])
        decayed = np.array([1.0, 1.0]) + 0.1 * weight
        velocity = 0.5 * first_velocity + decayed
        expected = weight - 0.1 * velocity
        optimizer.step(params, [np.array([1.0, 1.0]), np.array([0.0])], lr=0.1)
        np.testing.assert_allclose(weight, expected)
        np.testing.assert_allclose(bias, [0.4 - 0.1 * 0.5])

    def test_gradient_shape_is_checked(self):
        with pytest.raises(ShapeMismatchError, match="expected"):
            SGD().step([("0.weight", np.zeros(2))], [np.zeros(3)], lr=0.1)

    def test_gradient_count_is_checked(self):
        with pytest.raises(ShapeMismatchError, match="gradients"):
            SGD().step([("0.weight", np.zeros(2))], [], lr=0.1)

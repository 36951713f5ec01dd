"""SGD training plus clean-accuracy and attack-success-rate evaluation."""

from latentdoor.training.config import TrainConfig, TrainHistory
from latentdoor.training.optimizer import SGD
from latentdoor.training.trainer import (
    attack_success_rate,
    check_shape,
    cross_entropy_gradients,
    evaluate_accuracy,
    fit_epoch,
    train,
)

__all__ = [
    "SGD",
    "TrainConfig",
    "TrainHistory",
    "attack_success_rate",
    "check_shape",
    "cross_entropy_gradients",
    "evaluate_accuracy",
    "fit_epoch",
    "train",
]

# Copyright 2025 Dragos Crintea - HikariLabs LTD
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#       http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Training loop and the two evaluation metrics, clean accuracy and ASR.

Training is deterministic given ``TrainConfig.seed``: the shuffle order
comes from one generator, gradients are reduced over the batch in a fixed
order and the best-validation checkpoint is a deep copy. Running the same
config twice yields bitwise-identical parameters.
"""

import logging
import math
from typing import Callable, Optional

import numpy as np
from tqdm.auto import tqdm

from latentdoor.data.dataset import Dataset
from latentdoor.data.triggers import TriggerSpec, apply_trigger
from latentdoor.errors import (
    DivergedLossError,
    EmptyEvaluationSetError,
    NonFiniteGradientError,
    ShapeMismatchError,
)
from latentdoor.models.network import Network, trace_backward, trace_forward
from latentdoor.numerics.losses import batch_softmax_cross_entropy
from latentdoor.numerics.tensor import ensure_finite
from latentdoor.training.config import TrainConfig, TrainHistory
from latentdoor.training.optimizer import SGD

logger = logging.getLogger(__name__)

#: ``(net, images, labels) -> (mean loss, parameter gradients)``
GradientFn = Callable[[Network, np.ndarray, np.ndarray], tuple[float, list[np.ndarray]]]


def cross_entropy_gradients(
    net: Network, images: np.ndarray, labels: np.ndarray
) -> tuple[float, list[np.ndarray]]:
    """Mean cross-entropy over a batch and its parameter gradients."""
    trace = trace_forward(net, images)
    losses, logit_grad = batch_softmax_cross_entropy(trace.logits, labels)
    logit_grad = logit_grad / len(labels)
    _, grads = trace_backward(net, trace, logit_grad)
    return float(np.mean(losses, dtype=np.float64)), grads


def check_shape(net: Network, ds: Dataset) -> None:
    """Raises ``ShapeMismatchError`` unless ``ds`` fits the network input."""
    if ds.sample_shape != net.input_shape:
        raise ShapeMismatchError(
            f"{ds.split.value} samples have shape {ds.sample_shape!r}, the "
            f"network expects {net.input_shape!r}"
        )


def fit_epoch(  # pylint: disable=R0913
    net: Network,
    images: np.ndarray,
    labels: np.ndarray,
    optimizer: SGD,
    lr: float,
    batch_size: int,
    rng: np.random.Generator,
    gradient_fn: GradientFn = cross_entropy_gradients,
    progress: bool = False,
    desc: str = "epoch",
) -> float:
    """One pass over shuffled mini-batches, updating ``net`` in place.

    Returns:
        float: Sample-weighted mean loss over the epoch.

    Raises:
        DivergedLossError: If a batch loss is not finite.
        NonFiniteGradientError: If a parameter gradient is not finite.
    """
    order = rng.permutation(len(labels))
    total = 0.0
    starts = range(0, len(order), batch_size)
    for start in tqdm(starts, desc=desc, disable=not progress, leave=False):
        batch = order[start : start + batch_size]
        loss, grads = gradient_fn(net, images[batch], labels[batch])
        if not math.isfinite(loss):
            raise DivergedLossError(f"Loss became {loss!r} during {desc}")
        for grad in grads:
            ensure_finite(grad, "parameter gradient", NonFiniteGradientError)
        optimizer.step(net.parameters(), grads, lr)
        total += loss * len(batch)
    return total / len(order)


def evaluate_accuracy(net: Network, ds: Dataset, where: Optional[np.ndarray] = None) -> float:
    """Fraction of samples (optionally restricted by a mask) classified correctly.

    Raises:
        ShapeMismatchError: If the samples do not fit the network.
        EmptyEvaluationSetError: If the mask selects nothing.
    """
    check_shape(net, ds)
    mask = np.ones(len(ds), dtype=bool) if where is None else np.asarray(where, dtype=bool)
    if not mask.any():
        raise EmptyEvaluationSetError("No samples left to evaluate accuracy on")
    predictions = net.predict(ds.images[mask])
    return float(np.mean(predictions == ds.labels[mask]))


def attack_success_rate(net: Network, ds: Dataset, spec: TriggerSpec) -> float:
    """Fraction of triggered non-target samples classified as the target label.

    Samples whose true label already is ``y_t`` are never counted.

    Raises:
        EmptyEvaluationSetError: If every sample belongs to the target class.
    """
    check_shape(net, ds)
    mask = ds.labels != spec.target_label
    if not mask.any():
        raise EmptyEvaluationSetError(
            f"Every sample already has the target label {spec.target_label}"
        )
    triggered = apply_trigger(ds.images[mask], spec)
    return float(np.mean(net.predict(triggered) == spec.target_label))


def train(  # pylint: disable=R0913
    net: Network,
    train_set: Dataset,
    val: Dataset,
    cfg: TrainConfig,
    monitor_trigger: Optional[TriggerSpec] = None,
    progress: bool = False,
) -> tuple[Network, TrainHistory]:
    """Fits a copy of ``net`` and returns its best-validation-accuracy checkpoint.

    Ties go to the later epoch and reset the early-stopping count.

    Args:
        net: Initial network; never modified.
        train_set: Training samples (possibly poisoned).
        val: Clean validation samples used for checkpoint selection.
        cfg: Hyperparameters.
        monitor_trigger: Optional trigger whose validation ASR is logged
            each epoch; it never influences checkpoint selection.
        progress: Show a tqdm bar per epoch.

    Returns:
        tuple: The best checkpoint and the per-epoch history.

    Raises:
        ShapeMismatchError: If a dataset does not fit the network.
        DivergedLossError: If the loss stops being finite.
    """
    check_shape(net, train_set)
    check_shape(net, val)
    model = net.copy()
    rng = np.random.default_rng(cfg.seed)
    optimizer = SGD(cfg.momentum, cfg.weight_decay)
    history = TrainHistory()
    best, best_acc, stale = model.copy(), -1.0, 0

    for epoch in range(cfg.epochs):
        lr = cfg.learning_rate_at(epoch)
        loss = fit_epoch(
            model, train_set.images, train_set.labels, optimizer, lr,
            cfg.batch_size, rng, progress=progress, desc=f"epoch {epoch}",
        )
        val_acc = evaluate_accuracy(model, val)
        val_asr = math.nan
        if monitor_trigger is not None:
            try:
                val_asr = attack_success_rate(model, val, monitor_trigger)
            except EmptyEvaluationSetError:
                pass
        history.record(epoch, loss, val_acc, val_asr, lr)
        logger.info(
            "epoch %d: loss=%.4f val_acc=%.4f val_asr=%.4f lr=%g",
            epoch, loss, val_acc, val_asr, lr,
        )
        if val_acc >= best_acc:
            best, best_acc, stale = model.copy(), val_acc, 0
            history.best_epoch = epoch
        else:
            stale += 1
            if stale >= cfg.early_stop_patience:
                logger.info(
                    "Early stop after epoch %d; best val_acc=%.4f at epoch %d",
                    epoch, best_acc, history.best_epoch,
                )
                break
    return best, history

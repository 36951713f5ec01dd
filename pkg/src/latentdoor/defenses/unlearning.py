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

"""Unlearning: fine-tuning on trigger-carrying samples that keep their true labels.

Every epoch a fresh ``triggered_fraction`` of the clean training samples is
replaced by a triggered copy. The source of the "trigger" is either a
:class:`TriggerSpec` (the original backdoor) or an :class:`AdversarialSet`
of stored attack outputs, which turns the same loop into alternative-trigger
unlearning.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from latentdoor.attacks.batch import AdversarialSet
from latentdoor.data.dataset import Dataset
from latentdoor.data.triggers import TriggerSpec, apply_trigger
from latentdoor.errors import EmptyEvaluationSetError, InvalidConfigError, ShapeMismatchError
from latentdoor.models.network import Network
from latentdoor.training.config import TrainHistory
from latentdoor.training.optimizer import SGD
from latentdoor.training.trainer import (
    attack_success_rate,
    check_shape,
    evaluate_accuracy,
    fit_epoch,
)

logger = logging.getLogger(__name__)

UnlearnSource = Union[TriggerSpec, AdversarialSet]


@dataclass(frozen=True)
class UnlearnConfig:  # pylint: disable=R0902
    """Fine-tuning settings for unlearning; the learning rate is held fixed."""

    epochs: int = 5
    triggered_fraction: float = 0.10
    batch_size: int = 32
    lr: float = 0.01
    momentum: float = 0.9
    weight_decay: float = 5e-4
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 0:
            raise InvalidConfigError(f"epochs must be >= 0, got {self.epochs!r}")
        if not 0.0 < self.triggered_fraction <= 1.0:
            raise InvalidConfigError(
                f"triggered_fraction must lie in (0, 1], got {self.triggered_fraction!r}"
            )
        if self.batch_size < 1:
            raise InvalidConfigError(f"batch_size must be >= 1, got {self.batch_size!r}")
        if not (math.isfinite(self.lr) and self.lr >= 0):
            raise InvalidConfigError(f"lr must be finite and >= 0, got {self.lr!r}")
        if not 0.0 <= self.momentum < 1.0:
            raise InvalidConfigError(f"momentum must lie in [0, 1), got {self.momentum!r}")


def mixed_epoch(
    clean: Dataset, source: UnlearnSource, fraction: float, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """One epoch's images and labels with ``round(fraction * N)`` positions swapped.

    A trigger source stamps the trigger onto the chosen clean samples and
    keeps their labels. An adversarial source overwrites the chosen
    positions with randomly drawn stored examples and their true labels;
    at most ``len(source)`` positions are swapped.
    """
    images = np.array(clean.images)
    labels = np.array(clean.labels)
    count = min(len(clean), int(math.floor(fraction * len(clean) + 0.5)))
    if isinstance(source, AdversarialSet):
        count = min(count, len(source))
    positions = np.sort(rng.choice(len(clean), size=count, replace=False))
    if isinstance(source, TriggerSpec):
        images[positions] = apply_trigger(images[positions], source)
    else:
        picks = rng.choice(len(source), size=count, replace=False)
        images[positions] = source.images[picks]
        labels[positions] = source.labels[picks]
    return images, labels


def unlearn_trigger(  # pylint: disable=R0913,R0914
    net: Network,
    clean_train: Dataset,
    source: UnlearnSource,
    cfg: UnlearnConfig = UnlearnConfig(),
    val: Optional[Dataset] = None,
    progress: bool = False,
) -> tuple[Network, TrainHistory]:
    """Fine-tunes a copy of ``net`` on clean data mixed with relabelled triggered samples.

    Args:
        net: Backdoored network; never modified.
        clean_train: Clean training samples with their true labels.
        source: The original trigger, or stored adversarial examples paired
            with their true labels.
        cfg: Fine-tuning settings.
        val: Optional validation set whose accuracy (and, for a trigger
            source, ASR) is logged per epoch.
        progress: Show a tqdm bar per epoch.

    Returns:
        tuple: The fine-tuned network and its per-epoch history.

    Raises:
        ShapeMismatchError: If a dataset or the adversarial images do not
            fit the network.
        EmptyEvaluationSetError: If ``clean_train`` is empty.
    """
    if len(clean_train) == 0:
        raise EmptyEvaluationSetError("Unlearning needs clean training samples")
    check_shape(net, clean_train)
    if isinstance(source, AdversarialSet) and source.images.shape[1:] != net.input_shape:
        raise ShapeMismatchError(
            f"Adversarial images have shape {source.images.shape[1:]!r}, the network "
            f"expects {net.input_shape!r}"
        )
    model = net.copy()
    history = TrainHistory()
    optimizer = SGD(cfg.momentum, cfg.weight_decay)
    name = source.name if isinstance(source, TriggerSpec) else "adversarial"

    for epoch in range(cfg.epochs):
        rng = np.random.default_rng((cfg.seed, epoch))
        images, labels = mixed_epoch(clean_train, source, cfg.triggered_fraction, rng)
        loss = fit_epoch(
            model, images, labels, optimizer, cfg.lr, cfg.batch_size, rng,
            progress=progress, desc=f"unlearn {epoch}",
        )
        val_acc = evaluate_accuracy(model, val) if val is not None else math.nan
        val_asr = math.nan
        if val is not None and isinstance(source, TriggerSpec):
            val_asr = attack_success_rate(model, val, source)
        history.record(epoch, loss, val_acc, val_asr, cfg.lr)
        logger.info(
            "unlearn[%s] epoch %d: loss=%.4f val_acc=%.4f val_asr=%.4f",
            name, epoch, loss, val_acc, val_asr,
        )
    history.best_epoch = cfg.epochs - 1
    return model, history

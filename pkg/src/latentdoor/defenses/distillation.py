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

"""Attention distillation repair.

A backdoored student is fine-tuned on clean data while its intermediate
attention maps are pulled toward those of a clean teacher::

    L = CE(student(x), y) + λ Σ_ℓ ‖A_s^ℓ(x) - A_t^ℓ(x)‖²

An attention map sums squared activations over channels and normalises the
resulting ``H x W`` grid to unit L2 norm. The teacher is read-only.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from latentdoor.data.dataset import Dataset
from latentdoor.errors import (
    ArchitectureMismatchError,
    EmptyEvaluationSetError,
    InvalidConfigError,
    ShapeMismatchError,
)
from latentdoor.models.network import Network, trace_backward, trace_forward
from latentdoor.numerics.layers import Conv2d, ReLU
from latentdoor.numerics.losses import batch_softmax_cross_entropy
from latentdoor.training.config import TrainHistory
from latentdoor.training.optimizer import SGD
from latentdoor.training.trainer import check_shape, evaluate_accuracy, fit_epoch

logger = logging.getLogger(__name__)

_TINY = 1e-12


@dataclass(frozen=True)
class DistillConfig:  # pylint: disable=R0902
    """Attention distillation settings.

    ``attention_layers`` are layer indices whose OUTPUT is matched; ``None``
    selects every ReLU that directly follows a convolution.
    """

    lambda_attn: float = 0.5
    epochs: int = 10
    attention_layers: Optional[tuple[int, ...]] = None
    batch_size: int = 32
    lr: float = 0.01
    momentum: float = 0.9
    weight_decay: float = 5e-4
    seed: int = 0

    def __post_init__(self):
        if not (math.isfinite(self.lambda_attn) and self.lambda_attn >= 0):
            raise InvalidConfigError(f"lambda_attn must be >= 0, got {self.lambda_attn!r}")
        if self.epochs < 0:
            raise InvalidConfigError(f"epochs must be >= 0, got {self.epochs!r}")
        if self.batch_size < 1:
            raise InvalidConfigError(f"batch_size must be >= 1, got {self.batch_size!r}")
        if not (math.isfinite(self.lr) and self.lr >= 0):
            raise InvalidConfigError(f"lr must be finite and >= 0, got {self.lr!r}")
        if self.attention_layers is not None:
            object.__setattr__(
                self, "attention_layers", tuple(int(i) for i in self.attention_layers)
            )


def attention_map(features: np.ndarray) -> np.ndarray:
    """Spatially L2-normalised channel sum of squares.

    Accepts one activation ``(C, H, W)`` or a batch ``(N, C, H, W)`` and
    returns ``(H, W)`` or ``(N, H, W)``. An all-zero activation maps to the
    zero map.

    Raises:
        ShapeMismatchError: For any other rank.
    """
    features = np.asarray(features, dtype=np.float64)
    if features.ndim not in (3, 4):
        raise ShapeMismatchError(
            f"attention_map expects (C, H, W) or (N, C, H, W), got {features.shape!r}"
        )
    single = features.ndim == 3
    batch = features[None] if single else features
    energy = np.sum(batch * batch, axis=1)
    norms = np.sqrt(np.sum(energy * energy, axis=(1, 2), keepdims=True))
    maps = np.where(norms > _TINY, energy / np.maximum(norms, _TINY), 0.0)
    return maps[0] if single else maps


def attention_map_backward(features: np.ndarray, upstream: np.ndarray) -> np.ndarray:
    """Gradient w.r.t. a batch of activations given the gradient of their maps.

    With ``q = Σ_c a²``, ``A = q / ‖q‖`` and ``g = ∂L/∂A``::

        ∂L/∂q = (g - A ⟨A, g⟩) / ‖q‖,    ∂L/∂a = 2 a ∂L/∂q

    Zero maps receive zero gradient.
    """
    features = np.asarray(features, dtype=np.float64)
    energy = np.sum(features * features, axis=1)
    norms = np.sqrt(np.sum(energy * energy, axis=(1, 2), keepdims=True))
    maps = np.where(norms > _TINY, energy / np.maximum(norms, _TINY), 0.0)
    inner = np.sum(maps * upstream, axis=(1, 2), keepdims=True)
    grad_energy = np.where(norms > _TINY, (upstream - maps * inner) / np.maximum(norms, _TINY), 0.0)
    return 2.0 * features * grad_energy[:, None, :, :]


def default_attention_layers(net: Network) -> tuple[int, ...]:
    """Indices of ReLU layers that directly follow a convolution."""
    return tuple(
        index
        for index in range(1, len(net.layers))
        if isinstance(net.layers[index], ReLU) and isinstance(net.layers[index - 1], Conv2d)
    )


def _check_layers(net: Network, layers: Sequence[int]) -> None:
    for index in layers:
        if not 0 <= index < len(net.layers):
            raise InvalidConfigError(f"attention layer {index} is outside the network")
        shape = net.shapes[index + 1]
        if len(shape) != 3:
            raise ShapeMismatchError(
                f"Layer {index} outputs {shape!r}; attention needs a (C, H, W) activation"
            )


def distillation_gradients(
    student: Network,
    teacher: Network,
    images: np.ndarray,
    labels: np.ndarray,
    lambda_attn: float,
    layers: Sequence[int],
) -> tuple[float, list[np.ndarray]]:
    """Batch-mean distillation loss and the student's parameter gradients."""
    trace = trace_forward(student, images)
    teacher_trace = trace_forward(teacher, images)
    losses, logit_grad = batch_softmax_cross_entropy(trace.logits, labels)
    count = len(labels)
    total = float(np.mean(losses, dtype=np.float64))
    injections = {}
    if lambda_attn > 0:
        for index in layers:
            student_act = trace.activations[index + 1]
            diff = attention_map(student_act) - attention_map(teacher_trace.activations[index + 1])
            total += lambda_attn * float(np.sum(diff * diff)) / count
            upstream = 2.0 * lambda_attn * diff / count
            injections[index] = attention_map_backward(student_act, upstream).astype(
                student.dtype
            )
    _, grads = trace_backward(student, trace, logit_grad / count, injections)
    return total, grads


def distillation_loss(
    student: Network, teacher: Network, ds: Dataset, cfg: DistillConfig
) -> float:
    """Full-set distillation objective, for monitoring."""
    layers = cfg.attention_layers or default_attention_layers(student)
    loss, _ = distillation_gradients(
        student, teacher, ds.images, ds.labels, cfg.lambda_attn, layers
    )
    return loss


def distill_repair(  # pylint: disable=R0913
    student: Network,
    teacher: Network,
    clean_subset: Dataset,
    cfg: DistillConfig = DistillConfig(),
    val: Optional[Dataset] = None,
    progress: bool = False,
) -> tuple[Network, TrainHistory]:
    """Fine-tunes a copy of ``student`` toward the attention of a clean ``teacher``.

    Raises:
        ArchitectureMismatchError: If the two networks differ in architecture.
        EmptyEvaluationSetError: If ``clean_subset`` is empty.
    """
    if student.architecture_signature() != teacher.architecture_signature():
        raise ArchitectureMismatchError(
            "Student and teacher differ: "
            f"{student.architecture_signature()!r} vs {teacher.architecture_signature()!r}"
        )
    if len(clean_subset) == 0:
        raise EmptyEvaluationSetError("Distillation needs clean samples")
    check_shape(student, clean_subset)
    layers = cfg.attention_layers or default_attention_layers(student)
    _check_layers(student, layers)
    reference = teacher.astype(student.dtype) if teacher.dtype != student.dtype else teacher

    def gradient_fn(net, images, labels):
        return distillation_gradients(net, reference, images, labels, cfg.lambda_attn, layers)

    model = student.copy()
    history = TrainHistory()
    optimizer = SGD(cfg.momentum, cfg.weight_decay)
    rng = np.random.default_rng(cfg.seed)
    for epoch in range(cfg.epochs):
        loss = fit_epoch(
            model, clean_subset.images, clean_subset.labels, optimizer, cfg.lr,
            cfg.batch_size, rng, gradient_fn=gradient_fn, progress=progress,
            desc=f"distill {epoch}",
        )
        val_acc = evaluate_accuracy(model, val) if val is not None else math.nan
        history.record(epoch, loss, val_acc, math.nan, cfg.lr)
        logger.info("distill epoch %d: loss=%.4f val_acc=%.4f", epoch, loss, val_acc)
    history.best_epoch = cfg.epochs - 1
    return model, history

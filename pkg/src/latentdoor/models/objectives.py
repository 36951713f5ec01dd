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

"""Scalar attack objectives and their input gradients.

All objectives are maximised:

* ``ce_toward(y)``: ``J = CE(f(x), y)``, pushing away from ``y``;
* ``negative_ce_toward(y)``: ``J = -CE(f(x), y)``, pulling toward ``y``;
* ``guided(y, d, β)``: ``J = -CE(f(x), y) + β ⟨φ(x), d⟩``.

With ``β = 0`` the guided objective runs exactly the same arithmetic as
``negative_ce_toward``; the feature injection is skipped, not added as
zeros.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

import numpy as np

from latentdoor.errors import InvalidConfigError, NonFiniteGradientError, ShapeMismatchError
from latentdoor.models.network import ForwardTrace, Network, trace_backward, trace_forward
from latentdoor.numerics.losses import batch_softmax_cross_entropy
from latentdoor.numerics.tensor import ensure_finite

Labels = Union[int, np.ndarray]


class ObjectiveKind(Enum):
    """Which scalar objective an attack ascends."""

    CE_TOWARD = "ce_toward"
    NEGATIVE_CE_TOWARD = "negative_ce_toward"
    GUIDED = "guided"


@dataclass(frozen=True, eq=False)
class ObjectiveSpec:
    """An objective together with its label(s) and, for ``GUIDED``, the direction.

    ``label`` is one class index for every sample or an ``(N,)`` array.
    """

    kind: ObjectiveKind
    label: Labels
    direction: Optional[np.ndarray] = None
    beta: float = 0.0

    def __post_init__(self):
        if self.kind is ObjectiveKind.GUIDED:
            if self.direction is None or np.ndim(self.direction) != 1:
                raise InvalidConfigError("The guided objective needs a 1-D direction")
            if not self.beta >= 0:
                raise InvalidConfigError(f"beta must be >= 0, got {self.beta!r}")
        elif self.direction is not None:
            raise InvalidConfigError(
                f"{self.kind.value} does not take a feature direction"
            )

    @classmethod
    def ce_toward(cls, label: Labels) -> "ObjectiveSpec":
        return cls(ObjectiveKind.CE_TOWARD, label)

    @classmethod
    def negative_ce_toward(cls, label: Labels) -> "ObjectiveSpec":
        return cls(ObjectiveKind.NEGATIVE_CE_TOWARD, label)

    @classmethod
    def guided(cls, label: Labels, direction: np.ndarray, beta: float = 1.0) -> "ObjectiveSpec":
        return cls(
            ObjectiveKind.GUIDED, label, np.asarray(direction, dtype=np.float64), beta
        )

    def labels_for(self, count: int) -> np.ndarray:
        """Broadcasts ``label`` to one index per sample."""
        labels = np.asarray(self.label, dtype=np.int64)
        if labels.ndim == 0:
            return np.full(count, int(labels), dtype=np.int64)
        if labels.shape != (count,):
            raise ShapeMismatchError(
                f"Objective carries {labels.shape!r} labels for {count} samples"
            )
        return labels

    @property
    def uses_features(self) -> bool:
        """True when the feature term contributes (guided with ``β != 0``)."""
        return self.kind is ObjectiveKind.GUIDED and self.beta != 0


def _check_direction(net: Network, objective: ObjectiveSpec) -> None:
    if objective.direction is not None and objective.direction.shape != (net.feature_dim,):
        raise ShapeMismatchError(
            f"Direction has shape {objective.direction.shape!r}, features have "
            f"length {net.feature_dim}"
        )


def objective_values(net: Network, trace: ForwardTrace, objective: ObjectiveSpec) -> np.ndarray:
    """Per-sample ``J`` for an already traced batch."""
    _check_direction(net, objective)
    labels = objective.labels_for(trace.logits.shape[0])
    losses, _ = batch_softmax_cross_entropy(trace.logits, labels)
    if objective.kind is ObjectiveKind.CE_TOWARD:
        return losses
    values = -losses
    if objective.kind is ObjectiveKind.GUIDED:
        projection = trace.features.astype(np.float64) @ objective.direction
        values = values + objective.beta * projection
    return values


def objective_gradient(
    net: Network, trace: ForwardTrace, objective: ObjectiveSpec
) -> np.ndarray:
    """``∇ₓJ`` for every sample of an already traced batch."""
    _check_direction(net, objective)
    labels = objective.labels_for(trace.logits.shape[0])
    _, logit_grad = batch_softmax_cross_entropy(trace.logits, labels)
    if objective.kind is not ObjectiveKind.CE_TOWARD:
        logit_grad = -logit_grad
    injections = {}
    if objective.uses_features:
        feature_grad = objective.beta * objective.direction
        injections[net.feature_tap] = np.broadcast_to(
            feature_grad.astype(net.dtype), trace.features.shape
        )
    grad, _ = trace_backward(net, trace, logit_grad, injections, with_params=False)
    return ensure_finite(grad, "input gradient", NonFiniteGradientError)


def evaluate_objective(net: Network, x: np.ndarray, objective: ObjectiveSpec) -> np.ndarray:
    """Objective value for one sample (a 0-d array) or a batch ``(N,)``."""
    batch, single = net.input_batch(x)
    values = objective_values(net, trace_forward(net, batch), objective)
    return values[0] if single else values


def input_gradient(net: Network, x: np.ndarray, objective: ObjectiveSpec) -> np.ndarray:
    """Gradient of the objective with respect to ``x``, shaped like ``x``.

    Raises:
        ShapeMismatchError: If ``x`` or the direction has the wrong shape.
        NonFiniteGradientError: If the gradient contains NaN or infinity.
    """
    batch, single = net.input_batch(x)
    grad = objective_gradient(net, trace_forward(net, batch), objective)
    return grad[0] if single else grad


def feature_gradient(net: Network, x: np.ndarray, direction: np.ndarray) -> np.ndarray:
    """Gradient of ``⟨φ(x), d⟩`` alone: the vector-Jacobian product of ``φ`` with ``d``."""
    batch, single = net.input_batch(x)
    trace = trace_forward(net, batch)
    direction = np.asarray(direction, dtype=net.dtype)
    if direction.shape != (net.feature_dim,):
        raise ShapeMismatchError(
            f"Direction has shape {direction.shape!r}, features have length "
            f"{net.feature_dim}"
        )
    injections = {net.feature_tap: np.broadcast_to(direction, trace.features.shape)}
    grad, _ = trace_backward(
        net, trace, np.zeros_like(trace.logits), injections, with_params=False
    )
    return grad[0] if single else grad

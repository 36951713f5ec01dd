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

"""Softmax cross-entropy with its logit gradient."""

import numpy as np
from scipy.special import log_softmax

from latentdoor.errors import LabelOutOfRangeError, ShapeMismatchError


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax over the last axis, stabilised by max-subtraction."""
    return np.exp(log_softmax(logits, axis=-1))


def batch_softmax_cross_entropy(
    logits: np.ndarray, labels: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Per-sample cross-entropy and its gradient with respect to the logits.

    Args:
        logits: ``(N, m)`` array.
        labels: ``(N,)`` integer class indices.

    Returns:
        tuple: ``losses`` of shape ``(N,)`` with ``-log softmax(logits)[label]``
        and ``grads`` of shape ``(N, m)`` equal to ``softmax - one_hot``.

    Raises:
        ShapeMismatchError: If the arrays do not line up.
        LabelOutOfRangeError: If a label is not in ``[0, m)``.
    """
    logits = np.asarray(logits)
    labels = np.asarray(labels)
    if logits.ndim != 2 or labels.shape != (logits.shape[0],):
        raise ShapeMismatchError(
            f"Expected (N, m) logits and (N,) labels, got {logits.shape!r} "
            f"and {labels.shape!r}"
        )
    num_classes = logits.shape[1]
    if labels.size and (labels.min() < 0 or labels.max() >= num_classes):
        raise LabelOutOfRangeError(
            f"Labels must lie in [0, {num_classes}), got range "
            f"[{labels.min()}, {labels.max()}]"
        )
    rows = np.arange(logits.shape[0])
    log_probs = log_softmax(logits, axis=1)
    losses = -log_probs[rows, labels]
    grads = np.exp(log_probs)
    grads[rows, labels] -= 1
    return losses, grads


def softmax_cross_entropy(logits: np.ndarray, label: int) -> tuple[float, np.ndarray]:
    """Single-vector form of :func:`batch_softmax_cross_entropy`."""
    logits = np.asarray(logits)
    if logits.ndim != 1:
        raise ShapeMismatchError(f"Expected a logit vector, got shape {logits.shape!r}")
    losses, grads = batch_softmax_cross_entropy(logits[None], np.array([label]))
    return float(losses[0]), grads[0]

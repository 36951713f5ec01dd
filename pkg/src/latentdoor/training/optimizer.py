"""Stochastic gradient descent with momentum and weight decay."""

from typing import Optional, Sequence

import numpy as np

from latentdoor.errors import ShapeMismatchError


class SGD:
    """Heavy-ball SGD in the common deep-learning convention.

    For each parameter ``w`` with gradient ``g``::

        g = g + weight_decay * w      (weights only, never biases)
        v = momentum * v + g          (v = g on the first step)
        w = w - lr * v

    Parameters are updated in place.
    """

    def __init__(self, momentum: float = 0.9, weight_decay: float = 5e-4):
        self.momentum = momentum
        self.weight_decay = weight_decay
        self.buffers: Optional[list[np.ndarray]] = None

    def step(
        self,
        params: Sequence[tuple[str, np.ndarray]],
        grads: Sequence[np.ndarray],
        lr: float,
    ) -> None:
        """Applies one update to ``params`` (``Network.parameters()`` pairs)."""
        if len(params) != len(grads):
            raise ShapeMismatchError(f"{len(grads)} gradients for {len(params)} parameters")
        first = self.buffers is None
        if first:
            self.buffers = []
        for index, ((name, param), grad) in enumerate(zip(params, grads)):
            if grad.shape != param.shape:
                raise ShapeMismatchError(
                    f"Gradient for {name} has shape {grad.shape!r}, expected {param.shape!r}"
                )
            if self.weight_decay and name.endswith("weight"):
                grad = grad + self.weight_decay * param
            if first:
                self.buffers.append(np.array(grad, dtype=param.dtype))  # type: ignore[union-attr]
            else:
                buffer = self.buffers[index]  # type: ignore[index]
                buffer *= self.momentum
                buffer += grad
            param -= (lr * self.buffers[index]).astype(param.dtype)  # type: ignore[index]

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

"""The layered classifier ``f = g ∘ φ`` and its reverse-mode pass.

A :class:`Network` is an ordered list of layers plus a ``feature_tap``
index. The feature extractor ``φ`` is layers ``0..feature_tap`` inclusive;
the head ``g`` is everything after it and must end in a linear layer that
emits ``num_classes`` logits. :meth:`Network.forward` runs the extractor
and then the head, so ``forward(x)`` and ``head_forward(features_at(x))``
execute the same operations on the same arrays and agree bitwise.

:func:`trace_forward` records every activation; :func:`trace_backward`
walks the layers in reverse and accepts extra gradients injected at any
layer output. Objectives that depend on features (the guided attack term,
attention maps) use the injections instead of a second graph.
"""

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from latentdoor.errors import (
    InvalidConfigError,
    NoLinearHeadError,
    ShapeMismatchError,
)
from latentdoor.numerics.layers import Layer, Linear
from latentdoor.numerics.tensor import as_batch


@dataclass(eq=False)
class Network:
    """Classifier with a designated feature tap.

    Attributes:
        layers: Layers in execution order.
        feature_tap: Index of the layer whose OUTPUT is the feature vector.
        num_classes: Number of logits ``m``.
        input_shape: Per-sample ``(C, H, W)``.
    """

    layers: list[Layer]
    feature_tap: int
    num_classes: int
    input_shape: tuple[int, int, int]
    shapes: list[tuple[int, ...]] = field(init=False, repr=False)

    def __post_init__(self):
        self.layers = list(self.layers)
        self.input_shape = tuple(int(d) for d in self.input_shape)  # type: ignore[assignment]
        if len(self.input_shape) != 3 or min(self.input_shape) < 1:
            raise ShapeMismatchError(
                f"input_shape must be (C, H, W), got {self.input_shape!r}"
            )
        if self.num_classes < 2:
            raise InvalidConfigError(
                f"num_classes must be >= 2, got {self.num_classes!r}"
            )
        if not 0 <= self.feature_tap < len(self.layers) - 1:
            raise NoLinearHeadError(
                f"feature_tap={self.feature_tap!r} leaves no head layers in a "
                f"{len(self.layers)}-layer network"
            )
        if not isinstance(self.layers[-1], Linear):
            raise NoLinearHeadError(
                f"The head must end in a linear layer, found "
                f"{self.layers[-1].kind.value!r}"
            )

        shapes: list[tuple[int, ...]] = [self.input_shape]
        for layer in self.layers:
            shapes.append(layer.output_shape(shapes[-1]))
        self.shapes = shapes

        if len(shapes[self.feature_tap + 1]) != 1:
            raise ShapeMismatchError(
                f"The activation at feature_tap={self.feature_tap} has shape "
                f"{shapes[self.feature_tap + 1]!r}; features must be a flat vector"
            )
        if shapes[-1] != (self.num_classes,):
            raise ShapeMismatchError(
                f"The head emits {shapes[-1]!r}, expected ({self.num_classes},) logits"
            )
        dtypes = {layer.dtype for layer in self.layers if layer.dtype is not None}
        if len(dtypes) != 1:
            raise InvalidConfigError(
                f"All parameters must share one dtype, found {sorted(map(str, dtypes))}"
            )

    @property
    def dtype(self) -> np.dtype:
        """Floating dtype of every parameter and activation."""
        return next(layer.dtype for layer in self.layers if layer.dtype is not None)

    @property
    def feature_dim(self) -> int:
        """Length ``d`` of the feature vector."""
        return self.shapes[self.feature_tap + 1][0]

    @property
    def layer_tag(self) -> str:
        """Identifies the feature tap, e.g. ``"flatten@5:16"``."""
        tapped = self.layers[self.feature_tap]
        return f"{tapped.kind.value}@{self.feature_tap}:{self.feature_dim}"

    def architecture_signature(self) -> str:
        """Layer-by-layer description; equal signatures mean compatible parameters."""
        shape = "x".join(str(d) for d in self.input_shape)
        body = "|".join(layer.describe() for layer in self.layers)
        return f"{shape}|{body}|tap{self.feature_tap}|m{self.num_classes}"

    def _run(self, x: np.ndarray, start: int, stop: int) -> np.ndarray:
        for layer in self.layers[start:stop]:
            x = layer.forward(x)
        return x

    def input_batch(self, x: np.ndarray) -> tuple[np.ndarray, bool]:
        """Casts one sample or a batch to a batch in the network dtype."""
        batch, single = as_batch(x, self.input_shape, "network input")
        return np.asarray(batch, dtype=self.dtype), single

    def forward(self, x: np.ndarray) -> np.ndarray:
        """Logits for one sample ``(C, H, W)`` or a batch ``(N, C, H, W)``."""
        batch, single = self.input_batch(x)
        features = self._run(batch, 0, self.feature_tap + 1)
        logits = self._run(features, self.feature_tap + 1, len(self.layers))
        return logits[0] if single else logits

    def features_at(self, x: np.ndarray) -> np.ndarray:
        """Feature vector(s) ``φ(x)`` at the tap."""
        batch, single = self.input_batch(x)
        features = self._run(batch, 0, self.feature_tap + 1)
        return features[0] if single else features

    def head_forward(self, z: np.ndarray) -> np.ndarray:
        """Logits ``g(z)`` for injected feature vector(s) of length ``d``."""
        batch, single = as_batch(z, (self.feature_dim,), "feature vector")
        batch = np.asarray(batch, dtype=self.dtype)
        logits = self._run(batch, self.feature_tap + 1, len(self.layers))
        return logits[0] if single else logits

    def predict(self, x: np.ndarray, batch_size: int = 256) -> np.ndarray:
        """Arg-max class for every sample in a batch, evaluated in chunks."""
        batch, single = self.input_batch(x)
        labels = [
            np.argmax(self.forward(batch[i : i + batch_size]), axis=1)
            for i in range(0, len(batch), batch_size)
        ]
        result = np.concatenate(labels) if labels else np.zeros(0, dtype=np.int64)
        return result[0] if single else result

    def head_weight_matrix(self) -> np.ndarray:
        """The final linear layer's weight matrix ``(m, d_last)``, bias excluded."""
        final = self.layers[-1]
        if not isinstance(final, Linear):
            raise NoLinearHeadError("The network does not end in a linear layer")
        return final.weight

    def parameters(self) -> list[tuple[str, np.ndarray]]:
        """``("<layer>.<name>", array)`` pairs, live references, in layer order."""
        return [
            (f"{index}.{name}", param)
            for index, layer in enumerate(self.layers)
            for name, param in zip(layer.param_names, layer.params)
        ]

    def with_parameters(self, params: Sequence[np.ndarray]) -> "Network":
        """Returns a network of the same architecture carrying ``params``."""
        params = list(params)
        layers = []
        for layer in self.layers:
            count = len(layer.param_names)
            layers.append(layer.with_params(params[:count]))
            params = params[count:]
        if params:
            raise ShapeMismatchError(f"{len(params)} surplus parameter arrays")
        return Network(layers, self.feature_tap, self.num_classes, self.input_shape)

    def copy(self) -> "Network":
        """Deep copy with independent parameter arrays."""
        return self.with_parameters([p.copy() for _, p in self.parameters()])

    def astype(self, dtype) -> "Network":
        """Copy with every parameter cast to ``dtype``."""
        return self.with_parameters(
            [p.astype(dtype) for _, p in self.parameters()]
        )


@dataclass(frozen=True, eq=False)
class ForwardTrace:
    """All activations of one batched forward pass.

    ``activations[0]`` is the input batch and ``activations[i + 1]`` the
    output of layer ``i``.
    """

    activations: list[np.ndarray]
    feature_tap: int

    @property
    def logits(self) -> np.ndarray:
        return self.activations[-1]

    @property
    def features(self) -> np.ndarray:
        return self.activations[self.feature_tap + 1]


def trace_forward(net: Network, x: np.ndarray) -> ForwardTrace:
    """Runs a batch ``(N, C, H, W)`` forward, keeping every activation."""
    batch, single = net.input_batch(x)
    if single:
        raise ShapeMismatchError("trace_forward expects a batch, not a single sample")
    activations = [batch]
    for layer in net.layers:
        activations.append(layer.forward(activations[-1]))
    return ForwardTrace(activations, net.feature_tap)


def trace_backward(
    net: Network,
    trace: ForwardTrace,
    logit_grad: np.ndarray,
    injections: Optional[Mapping[int, np.ndarray]] = None,
    with_params: bool = True,
) -> tuple[np.ndarray, list[np.ndarray]]:
    """Back-propagates ``logit_grad`` through every layer.

    Args:
        net: The traced network.
        trace: Activations from :func:`trace_forward` on ``net``.
        logit_grad: Gradient of the objective with respect to the logits.
        injections: Extra gradients keyed by layer index, added to the
            gradient of that layer's output before it is back-propagated.
        with_params: Whether to compute parameter gradients.

    Returns:
        tuple: Input gradient and parameter gradients in
        :meth:`Network.parameters` order (empty when ``with_params`` is
        false).
    """
    injections = injections or {}
    if logit_grad.shape != trace.logits.shape:
        raise ShapeMismatchError(
            f"logit gradient has shape {logit_grad.shape!r}, expected "
            f"{trace.logits.shape!r}"
        )
    grad = logit_grad
    per_layer: list[list[np.ndarray]] = [[] for _ in net.layers]
    for index in range(len(net.layers) - 1, -1, -1):
        if index in injections:
            injected = injections[index]
            if injected.shape != trace.activations[index + 1].shape:
                raise ShapeMismatchError(
                    f"Injection at layer {index} has shape {injected.shape!r}, "
                    f"expected {trace.activations[index + 1].shape!r}"
                )
            grad = grad + injected
        grad, per_layer[index] = net.layers[index].backward(
            trace.activations[index], grad, with_params
        )
    return grad, [g for layer_grads in per_layer for g in layer_grads]

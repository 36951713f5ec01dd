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

"""Layers with hand-written forward and backward passes.

Each layer is a small dataclass holding its parameter arrays. ``forward``
maps a batch ``(N, *in_shape)`` to ``(N, *out_shape)``; ``backward`` takes
the same input batch plus the upstream gradient and returns the input
gradient together with one gradient per parameter, in ``param_names``
order. Parameter gradients are summed over the batch.

Convolution windows are taken with ``sliding_window_view`` and contracted
with ``tensordot``; the input gradient scatters the window gradients back
one kernel offset at a time, so every reduction runs in a fixed order.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, replace
from enum import Enum
from typing import ClassVar, Optional, Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from typing_extensions import override

from latentdoor.errors import InvalidConfigError, ShapeMismatchError


class LayerKind(Enum):
    """Layer vocabulary, with the one-byte tag used by the model file format."""

    CONV2D = "conv2d"
    RELU = "relu"
    LINEAR = "linear"
    GLOBAL_AVG_POOL = "global_avg_pool"
    FLATTEN = "flatten"

    @property
    def tag(self) -> int:
        """Stable on-disk identifier."""
        return _KIND_TAGS[self]

    @classmethod
    def from_tag(cls, tag: int) -> "LayerKind":
        """Inverse of :attr:`tag`; raises ``KeyError`` for unknown tags."""
        return _TAG_KINDS[tag]


_KIND_TAGS = {
    LayerKind.CONV2D: 1,
    LayerKind.RELU: 2,
    LayerKind.LINEAR: 3,
    LayerKind.GLOBAL_AVG_POOL: 4,
    LayerKind.FLATTEN: 5,
}
_TAG_KINDS = {tag: kind for kind, tag in _KIND_TAGS.items()}


class Layer(ABC):
    """Base class of all layers."""

    kind: ClassVar[LayerKind]
    param_names: ClassVar[tuple[str, ...]] = ()

    @property
    def params(self) -> list[np.ndarray]:
        """Parameter arrays in ``param_names`` order (live references)."""
        return [getattr(self, name) for name in self.param_names]

    @property
    def dtype(self) -> Optional[np.dtype]:
        """Parameter dtype, or None for parameter-free layers."""
        params = self.params
        return params[0].dtype if params else None

    @abstractmethod
    def output_shape(self, input_shape: tuple[int, ...]) -> tuple[int, ...]:
        """Per-sample output shape; raises ``ShapeMismatchError`` if the input is invalid."""

    @abstractmethod
    def forward(self, x: np.ndarray) -> np.ndarray:
        """Maps a batch through the layer."""

    @abstractmethod
    def backward(
        self, x: np.ndarray, upstream: np.ndarray, with_params: bool = True
    ) -> tuple[np.ndarray, list[np.ndarray]]:
        """Returns the input gradient and, if requested, the parameter gradients."""

    def with_params(self, params: Sequence[np.ndarray]) -> "Layer":
        """Returns a copy of this layer carrying ``params``."""
        if len(params) != len(self.param_names):
            raise ShapeMismatchError(
                f"{self.kind.value} takes {len(self.param_names)} parameters, "
                f"got {len(params)}"
            )
        return replace(self, **dict(zip(self.param_names, params)))  # type: ignore[type-var]

    def copy(self) -> "Layer":
        """Deep copy; parameter arrays are duplicated."""
        return self.with_params([p.copy() for p in self.params])

    def describe(self) -> str:
        """Short architecture description used in signatures and logs."""
        return self.kind.value

    def _check_upstream(self, x: np.ndarray, upstream: np.ndarray) -> None:
        expected = (x.shape[0], *self.output_shape(x.shape[1:]))
        if upstream.shape != expected:
            raise ShapeMismatchError(
                f"{self.kind.value}: upstream gradient has shape "
                f"{upstream.shape!r}, expected {expected!r}"
            )


def _he_normal(
    rng: np.random.Generator, shape: tuple[int, ...], fan_in: int, dtype
) -> np.ndarray:
    return (rng.standard_normal(shape) * np.sqrt(2.0 / fan_in)).astype(dtype)


@dataclass(eq=False)
class Conv2d(Layer):
    """2-D convolution with square stride and symmetric zero padding.

    ``weight`` has shape ``(out_channels, in_channels, kh, kw)``.
    """

    weight: np.ndarray
    bias: np.ndarray
    stride: int = 1
    padding: int = 0

    kind: ClassVar[LayerKind] = LayerKind.CONV2D
    param_names: ClassVar[tuple[str, ...]] = ("weight", "bias")

    def __post_init__(self):
        if self.weight.ndim != 4 or min(self.weight.shape) < 1:
            raise ShapeMismatchError(
                f"conv2d weight must be (out, in, kh, kw), got {self.weight.shape!r}"
            )
        if self.bias.shape != (self.weight.shape[0],):
            raise ShapeMismatchError(
                f"conv2d bias shape {self.bias.shape!r} does not match "
                f"{self.weight.shape[0]} output channels"
            )
        if self.stride < 1:
            raise InvalidConfigError(f"conv2d stride must be >= 1, got {self.stride!r}")
        if self.padding < 0:
            raise InvalidConfigError(
                f"conv2d padding must be >= 0, got {self.padding!r}"
            )

    @classmethod
    def create(  # pylint: disable=R0913
        cls,
        in_channels: int,
        out_channels: int,
        kernel: int,
        stride: int = 1,
        padding: int = 0,
        rng: Optional[np.random.Generator] = None,
        dtype=np.float32,
        init: str = "he",
    ) -> "Conv2d":
        """Builds a layer with He-normal (``init="he"``) or zero weights."""
        shape = (out_channels, in_channels, kernel, kernel)
        if init == "zeros":
            weight = np.zeros(shape, dtype=dtype)
        elif init == "he":
            rng = rng if rng is not None else np.random.default_rng(0)
            weight = _he_normal(rng, shape, in_channels * kernel * kernel, dtype)
        else:
            raise InvalidConfigError(f"Unknown init scheme {init!r}")
        return cls(weight, np.zeros(out_channels, dtype=dtype), stride, padding)

    @property
    def out_channels(self) -> int:
        return self.weight.shape[0]

    @property
    def in_channels(self) -> int:
        return self.weight.shape[1]

    @property
    def kernel_size(self) -> tuple[int, int]:
        return self.weight.shape[2], self.weight.shape[3]

    @override
    def output_shape(self, input_shape: tuple[int, ...]) -> tuple[int, ...]:
        if len(input_shape) != 3 or input_shape[0] != self.in_channels:
            raise ShapeMismatchError(
                f"conv2d expects ({self.in_channels}, H, W) input, got {input_shape!r}"
            )
        kh, kw = self.kernel_size
        h = input_shape[1] + 2 * self.padding
        w = input_shape[2] + 2 * self.padding
        if h < kh or w < kw:
            raise ShapeMismatchError(
                f"conv2d kernel {kh}x{kw} does not fit padded input {h}x{w}"
            )
        return (
            self.out_channels,
            (h - kh) // self.stride + 1,
            (w - kw) // self.stride + 1,
        )

    def _windows(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        p = self.padding
        padded = np.pad(x, ((0, 0), (0, 0), (p, p), (p, p))) if p else x
        windows = sliding_window_view(padded, self.kernel_size, axis=(2, 3))
        return padded, windows[:, :, :: self.stride, :: self.stride]

    @override
    def forward(self, x: np.ndarray) -> np.ndarray:
        self.output_shape(x.shape[1:])
        _, windows = self._windows(x)
        out = np.tensordot(windows, self.weight, axes=([1, 4, 5], [1, 2, 3]))
        out = out.transpose(0, 3, 1, 2) + self.bias[None, :, None, None]
        return np.ascontiguousarray(out)

    @override
    def backward(
        self, x: np.ndarray, upstream: np.ndarray, with_params: bool = True
    ) -> tuple[np.ndarray, list[np.ndarray]]:
        self._check_upstream(x, upstream)
        padded, windows = self._windows(x)
        kh, kw = self.kernel_size
        s = self.stride
        out_h, out_w = upstream.shape[2], upstream.shape[3]

        window_grads = np.tensordot(upstream, self.weight, axes=([1], [0]))
        padded_grad = np.zeros_like(padded)
        for i in range(kh):
            for j in range(kw):
                padded_grad[:, :, i : i + s * out_h : s, j : j + s * out_w : s] += (
                    window_grads[:, :, :, :, i, j].transpose(0, 3, 1, 2)
                )
        p = self.padding
        input_grad = padded_grad[:, :, p : p + x.shape[2], p : p + x.shape[3]]

        if not with_params:
            return np.ascontiguousarray(input_grad), []
        weight_grad = np.tensordot(upstream, windows, axes=([0, 2, 3], [0, 2, 3]))
        bias_grad = upstream.sum(axis=(0, 2, 3))
        return np.ascontiguousarray(input_grad), [weight_grad, bias_grad]

    @override
    def describe(self) -> str:
        o, i, kh, kw = self.weight.shape
        return f"conv2d({o},{i},{kh}x{kw},s{self.stride},p{self.padding})"


@dataclass(eq=False)
class Linear(Layer):
    """Affine map ``y = x Wᵀ + b`` with ``weight`` of shape ``(out_dim, in_dim)``."""

    weight: np.ndarray
    bias: np.ndarray

    kind: ClassVar[LayerKind] = LayerKind.LINEAR
    param_names: ClassVar[tuple[str, ...]] = ("weight", "bias")

    def __post_init__(self):
        if self.weight.ndim != 2 or min(self.weight.shape) < 1:
            raise ShapeMismatchError(
                f"linear weight must be (out, in), got {self.weight.shape!r}"
            )
        if self.bias.shape != (self.weight.shape[0],):
            raise ShapeMismatchError(
                f"linear bias shape {self.bias.shape!r} does not match "
                f"{self.weight.shape[0]} outputs"
            )

    @classmethod
    def create(  # pylint: disable=R0913
        cls,
        in_dim: int,
        out_dim: int,
        rng: Optional[np.random.Generator] = None,
        dtype=np.float32,
        init: str = "he",
    ) -> "Linear":
        """Builds a layer with He-normal (``init="he"``) or zero weights."""
        if init == "zeros":
            weight = np.zeros((out_dim, in_dim), dtype=dtype)
        elif init == "he":
            rng = rng if rng is not None else np.random.default_rng(0)
            weight = _he_normal(rng, (out_dim, in_dim), in_dim, dtype)
        else:
            raise InvalidConfigError(f"Unknown init scheme {init!r}")
        return cls(weight, np.zeros(out_dim, dtype=dtype))

    @property
    def in_dim(self) -> int:
        return self.weight.shape[1]

    @property
    def out_dim(self) -> int:
        return self.weight.shape[0]

    @override
    def output_shape(self, input_shape: tuple[int, ...]) -> tuple[int, ...]:
        if tuple(input_shape) != (self.in_dim,):
            raise ShapeMismatchError(
                f"linear expects ({self.in_dim},) input, got {input_shape!r}"
            )
        return (self.out_dim,)

    @override
    def forward(self, x: np.ndarray) -> np.ndarray:
        self.output_shape(x.shape[1:])
        return x @ self.weight.T + self.bias

    @override
    def backward(
        self, x: np.ndarray, upstream: np.ndarray, with_params: bool = True
    ) -> tuple[np.ndarray, list[np.ndarray]]:
        self._check_upstream(x, upstream)
        input_grad = upstream @ self.weight
        if not with_params:
            return input_grad, []
        return input_grad, [upstream.T @ x, upstream.sum(axis=0)]

    @override
    def describe(self) -> str:
        return f"linear({self.out_dim},{self.in_dim})"


@dataclass(eq=False)
class ReLU(Layer):
    """Element-wise ``max(x, 0)``; the gradient mask is ``x > 0``."""

    kind: ClassVar[LayerKind] = LayerKind.RELU

    @override
    def output_shape(self, input_shape: tuple[int, ...]) -> tuple[int, ...]:
        return tuple(input_shape)

    @override
    def forward(self, x: np.ndarray) -> np.ndarray:
        return np.maximum(x, 0)

    @override
    def backward(
        self, x: np.ndarray, upstream: np.ndarray, with_params: bool = True
    ) -> tuple[np.ndarray, list[np.ndarray]]:
        self._check_upstream(x, upstream)
        return upstream * (x > 0), []


@dataclass(eq=False)
class GlobalAvgPool(Layer):
    """Spatial mean, ``(C, H, W) -> (C,)``."""

    kind: ClassVar[LayerKind] = LayerKind.GLOBAL_AVG_POOL

    @override
    def output_shape(self, input_shape: tuple[int, ...]) -> tuple[int, ...]:
        if len(input_shape) != 3:
            raise ShapeMismatchError(
                f"global_avg_pool expects (C, H, W) input, got {input_shape!r}"
            )
        return (input_shape[0],)

    @override
    def forward(self, x: np.ndarray) -> np.ndarray:
        self.output_shape(x.shape[1:])
        return x.mean(axis=(2, 3))

    @override
    def backward(
        self, x: np.ndarray, upstream: np.ndarray, with_params: bool = True
    ) -> tuple[np.ndarray, list[np.ndarray]]:
        self._check_upstream(x, upstream)
        area = x.shape[2] * x.shape[3]
        spread = (upstream / area)[:, :, None, None]
        return np.broadcast_to(spread, x.shape).astype(x.dtype), []


@dataclass(eq=False)
class Flatten(Layer):
    """Collapses every per-sample axis into one."""

    kind: ClassVar[LayerKind] = LayerKind.FLATTEN

    @override
    def output_shape(self, input_shape: tuple[int, ...]) -> tuple[int, ...]:
        return (int(np.prod(input_shape, dtype=np.int64)),)

    @override
    def forward(self, x: np.ndarray) -> np.ndarray:
        return x.reshape(x.shape[0], -1)

    @override
    def backward(
        self, x: np.ndarray, upstream: np.ndarray, with_params: bool = True
    ) -> tuple[np.ndarray, list[np.ndarray]]:
        self._check_upstream(x, upstream)
        return upstream.reshape(x.shape), []


def forward_layer(layer: Layer, x: np.ndarray) -> np.ndarray:
    """Pure forward pass of one layer over a batch."""
    if np.ndim(x) < 2:
        raise ShapeMismatchError(
            f"{layer.kind.value}: expected a batch, got shape {np.shape(x)!r}"
        )
    return layer.forward(np.asarray(x))


def backward_layer(
    layer: Layer, x: np.ndarray, upstream: np.ndarray, with_params: bool = True
) -> tuple[np.ndarray, list[np.ndarray]]:
    """Exact chain rule for one layer: ``(input_grad, param_grads)``."""
    if np.ndim(x) < 2:
        raise ShapeMismatchError(
            f"{layer.kind.value}: expected a batch, got shape {np.shape(x)!r}"
        )
    return layer.backward(np.asarray(x), np.asarray(upstream), with_params)

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

"""The ``BDLM`` model file format.

Layout, all little-endian::

    magic      4s   b"BDLM"
    version    u16
    C, H, W    u32 x 3
    classes    u16
    tap        u16
    layers     u16
    per layer:
        kind   u8   (LayerKind.tag)
        shape  u32 x 6
        weight f32 x prod(weight shape)
        bias   f32 x len(bias)

The six shape words are ``out, in, kh, kw, stride, padding`` for conv2d,
``out, in, 0, 0, 0, 0`` for linear and zeros otherwise. Parameters are
always stored in single precision; a double-precision network is rounded
on save.
"""

import hashlib
import struct

import numpy as np

from latentdoor.errors import FormatError
from latentdoor.fileio import PathLike, atomic_write_bytes, read_bytes
from latentdoor.models.network import Network
from latentdoor.numerics.layers import (
    Conv2d,
    Flatten,
    GlobalAvgPool,
    Layer,
    LayerKind,
    Linear,
    ReLU,
)
from latentdoor.numerics.tensor import Precision

MODEL_MAGIC = b"BDLM"
MODEL_VERSION = 1

_HEADER = struct.Struct("<4sHIIIHHH")
_LAYER = struct.Struct("<B6I")
_F32 = np.dtype("<f4")


def _shape_words(layer: Layer) -> tuple[int, ...]:
    if isinstance(layer, Conv2d):
        return (*layer.weight.shape, layer.stride, layer.padding)
    if isinstance(layer, Linear):
        return (*layer.weight.shape, 0, 0, 0, 0)
    return (0,) * 6


def dumps_network(net: Network) -> bytes:
    """Serializes ``net`` to BDLM bytes."""
    chunks = [
        _HEADER.pack(
            MODEL_MAGIC,
            MODEL_VERSION,
            *net.input_shape,
            net.num_classes,
            net.feature_tap,
            len(net.layers),
        )
    ]
    for layer in net.layers:
        chunks.append(_LAYER.pack(layer.kind.tag, *_shape_words(layer)))
        for param in layer.params:
            chunks.append(np.ascontiguousarray(param, dtype=_F32).tobytes())
    return b"".join(chunks)


class _Reader:
    def __init__(self, payload: bytes):
        self.payload = payload
        self.offset = 0

    def unpack(self, fmt: struct.Struct) -> tuple:
        if self.offset + fmt.size > len(self.payload):
            raise FormatError("Truncated model file")
        values = fmt.unpack_from(self.payload, self.offset)
        self.offset += fmt.size
        return values

    def floats(self, shape: tuple[int, ...], dtype) -> np.ndarray:
        count = int(np.prod(shape, dtype=np.int64))
        size = count * _F32.itemsize
        if self.offset + size > len(self.payload):
            raise FormatError("Truncated model file")
        values = np.frombuffer(self.payload, dtype=_F32, count=count, offset=self.offset)
        self.offset += size
        return values.reshape(shape).astype(dtype)


def _read_layer(reader: _Reader, dtype) -> Layer:
    tag, *words = reader.unpack(_LAYER)
    try:
        kind = LayerKind.from_tag(tag)
    except KeyError as exc:
        raise FormatError(f"Unknown layer kind tag {tag!r}") from exc
    if kind is LayerKind.CONV2D:
        out_c, in_c, kh, kw, stride, padding = words
        weight = reader.floats((out_c, in_c, kh, kw), dtype)
        bias = reader.floats((out_c,), dtype)
        return Conv2d(weight, bias, stride, padding)
    if kind is LayerKind.LINEAR:
        out_d, in_d = words[:2]
        weight = reader.floats((out_d, in_d), dtype)
        bias = reader.floats((out_d,), dtype)
        return Linear(weight, bias)
    return {
        LayerKind.RELU: ReLU,
        LayerKind.GLOBAL_AVG_POOL: GlobalAvgPool,
        LayerKind.FLATTEN: Flatten,
    }[kind]()


def loads_network(payload: bytes, precision: Precision = Precision.SINGLE) -> Network:
    """Parses BDLM bytes.

    Raises:
        FormatError: On a bad magic or version, an unknown layer kind,
            truncation, trailing bytes, or an inconsistent architecture.
    """
    reader = _Reader(payload)
    magic, version, c, h, w, classes, tap, count = reader.unpack(_HEADER)
    if magic != MODEL_MAGIC:
        raise FormatError(f"Not a BDLM model file (magic {magic!r})")
    if version != MODEL_VERSION:
        raise FormatError(f"Unsupported BDLM version {version}")
    try:
        layers = [_read_layer(reader, precision.dtype) for _ in range(count)]
        if reader.offset != len(payload):
            raise FormatError(
                f"{len(payload) - reader.offset} trailing bytes after the last layer"
            )
        return Network(layers, tap, classes, (c, h, w))
    except FormatError:
        raise
    except ValueError as exc:
        raise FormatError(f"Inconsistent model file: {exc}") from exc


def save_network(net: Network, path: PathLike) -> None:
    """Writes ``net`` to ``path`` atomically."""
    atomic_write_bytes(path, dumps_network(net))


def load_network(path: PathLike, precision: Precision = Precision.SINGLE) -> Network:
    """Reads a BDLM file; a missing file raises ``MissingArtifactError``."""
    return loads_network(read_bytes(path, "model file"), precision)


def network_fingerprint(net: Network) -> str:
    """SHA-256 of the BDLM bytes; identifies a network's exact parameters."""
    return hashlib.sha256(dumps_network(net)).hexdigest()

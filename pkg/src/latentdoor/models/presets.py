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

"""Named architecture presets."""

from dataclasses import dataclass

import numpy as np

from latentdoor.errors import InvalidConfigError
from latentdoor.models.network import Network
from latentdoor.numerics.layers import Conv2d, Flatten, GlobalAvgPool, Linear, ReLU
from latentdoor.numerics.tensor import Precision


@dataclass(frozen=True)
class MicroNetConfig:
    """The desk-scale CNN.

    ``conv(8, 3x3) -> relu -> conv(16, 3x3, stride 2) -> relu ->
    global_avg_pool -> flatten -> linear(m)``, with the feature tap after
    ``flatten`` so features are 16-dimensional.
    """

    name: str = "micronet"
    conv1_channels: int = 8
    conv2_channels: int = 16
    kernel: int = 3
    conv2_stride: int = 2
    padding: int = 1
    min_spatial: int = 8

    def build(  # pylint: disable=R0913
        self,
        input_shape: tuple[int, int, int],
        num_classes: int,
        seed: int = 0,
        precision: Precision = Precision.SINGLE,
        init: str = "he",
    ) -> Network:
        """Instantiates the preset with weights drawn from ``seed``.

        Raises:
            InvalidConfigError: If the input is smaller than 8x8 or
                ``num_classes < 2``.
        """
        channels, height, width = (int(d) for d in input_shape)
        if min(height, width) < self.min_spatial:
            raise InvalidConfigError(
                f"{self.name} needs inputs of at least {self.min_spatial}x"
                f"{self.min_spatial}, got {height}x{width}"
            )
        if num_classes < 2:
            raise InvalidConfigError(f"num_classes must be >= 2, got {num_classes!r}")
        rng = np.random.default_rng(seed)
        dtype = precision.dtype
        layers = [
            Conv2d.create(
                channels, self.conv1_channels, self.kernel,
                stride=1, padding=self.padding, rng=rng, dtype=dtype, init=init,
            ),
            ReLU(),
            Conv2d.create(
                self.conv1_channels, self.conv2_channels, self.kernel,
                stride=self.conv2_stride, padding=self.padding, rng=rng,
                dtype=dtype, init=init,
            ),
            ReLU(),
            GlobalAvgPool(),
            Flatten(),
            Linear.create(self.conv2_channels, num_classes, rng=rng, dtype=dtype, init=init),
        ]
        return Network(layers, 5, num_classes, (channels, height, width))


PRESETS: dict[str, MicroNetConfig] = {"micronet": MicroNetConfig()}


def build_preset(name: str, *args, **kwargs) -> Network:
    """Looks up ``name`` in :data:`PRESETS` and builds it."""
    try:
        preset = PRESETS[name]
    except KeyError as exc:
        raise InvalidConfigError(
            f"Unknown architecture preset {name!r}. Known: {', '.join(sorted(PRESETS))}"
        ) from exc
    return preset.build(*args, **kwargs)

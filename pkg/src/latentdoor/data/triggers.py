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

"""Trigger transformations.

A trigger is a pure function ``π`` from an image to an image plus the
target label the backdoor maps it to. Three families are supported:

* **badnets**: a solid square patch stamped into one corner;
* **blend**: ``(1 - α) x + α τ`` with a fixed pattern ``τ``; every pixel
  moves by at most ``α``;
* **wanet**: a smooth backward warp. A ``k x k`` grid of random offsets is
  normalised by its mean magnitude, bilinearly upsampled to the image
  size, scaled by ``s`` and used to resample the image with border
  clamping. The field depends only on ``(k, s, seed)`` and the image size,
  never on the sample.

Outputs always stay in [0, 1] and keep the input dtype.
"""

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Any, Optional, Union

import numpy as np
from scipy.ndimage import map_coordinates

from latentdoor.errors import InvalidConfigError, ShapeMismatchError
from latentdoor.numerics.tensor import enforce_linf_bound


class TriggerKind(Enum):
    """Trigger family."""

    BADNETS = "badnets"
    BLEND = "blend"
    WANET = "wanet"


class Corner(Enum):
    """Where a BadNets patch is stamped."""

    BOTTOM_RIGHT = "bottom_right"
    BOTTOM_LEFT = "bottom_left"
    TOP_RIGHT = "top_right"
    TOP_LEFT = "top_left"


@dataclass(frozen=True)
class BadNetsParams:
    patch_size: int = 3
    corner: Corner = Corner.BOTTOM_RIGHT
    value: float = 1.0

    def __post_init__(self):
        if self.patch_size < 1:
            raise InvalidConfigError(f"patch_size must be >= 1, got {self.patch_size!r}")
        if not 0.0 <= self.value <= 1.0:
            raise InvalidConfigError(f"patch value must lie in [0, 1], got {self.value!r}")


@dataclass(frozen=True, eq=False)
class BlendParams:
    """Blend coefficient and pattern.

    Without an explicit ``pattern`` a uniform-noise pattern is drawn from
    ``pattern_seed`` at the image size.
    """

    alpha: float = 0.2
    pattern_seed: int = 0
    pattern: Optional[np.ndarray] = None

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise InvalidConfigError(f"blend alpha must lie in (0, 1), got {self.alpha!r}")
        if self.pattern is not None:
            pattern = np.asarray(self.pattern, dtype=np.float64)
            if pattern.min() < 0 or pattern.max() > 1:
                raise InvalidConfigError("blend pattern must lie in [0, 1]")

    def pattern_for(self, shape: tuple[int, ...]) -> np.ndarray:
        """The pattern ``τ`` for images of ``shape`` (float64)."""
        if self.pattern is None:
            return _noise_pattern(self.pattern_seed, tuple(shape))
        pattern = np.asarray(self.pattern, dtype=np.float64)
        if pattern.shape != tuple(shape):
            raise ShapeMismatchError(
                f"blend pattern has shape {pattern.shape!r}, images have {tuple(shape)!r}"
            )
        return pattern


@dataclass(frozen=True)
class WaNetParams:
    """Warp grid size ``k`` and strength ``s`` (``s = 0`` is the identity warp)."""

    grid_k: int = 4
    strength: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.grid_k < 2:
            raise InvalidConfigError(f"grid_k must be >= 2, got {self.grid_k!r}")
        if not self.strength >= 0:
            raise InvalidConfigError(f"strength must be >= 0, got {self.strength!r}")


TriggerParams = Union[BadNetsParams, BlendParams, WaNetParams]

_KIND_BY_PARAMS = {
    BadNetsParams: TriggerKind.BADNETS,
    BlendParams: TriggerKind.BLEND,
    WaNetParams: TriggerKind.WANET,
}


@dataclass(frozen=True, eq=False)
class TriggerSpec:
    """Trigger parameters plus the target label ``y_t`` (default 0)."""

    params: TriggerParams
    target_label: int = 0

    def __post_init__(self):
        if type(self.params) not in _KIND_BY_PARAMS:
            raise InvalidConfigError(f"Unknown trigger parameters {self.params!r}")
        if self.target_label < 0:
            raise InvalidConfigError(
                f"target_label must be >= 0, got {self.target_label!r}"
            )

    @property
    def kind(self) -> TriggerKind:
        return _KIND_BY_PARAMS[type(self.params)]

    @property
    def name(self) -> str:
        return self.kind.value

    @classmethod
    def badnets(
        cls,
        patch_size: int = 3,
        corner: Corner = Corner.BOTTOM_RIGHT,
        value: float = 1.0,
        target_label: int = 0,
    ) -> "TriggerSpec":
        return cls(BadNetsParams(patch_size, corner, value), target_label)

    @classmethod
    def blend(
        cls,
        alpha: float = 0.2,
        pattern: Optional[np.ndarray] = None,
        pattern_seed: int = 0,
        target_label: int = 0,
    ) -> "TriggerSpec":
        return cls(BlendParams(alpha, pattern_seed, pattern), target_label)

    @classmethod
    def wanet(
        cls,
        grid_k: int = 4,
        strength: float = 0.5,
        seed: int = 0,
        target_label: int = 0,
    ) -> "TriggerSpec":
        return cls(WaNetParams(grid_k, strength, seed), target_label)

    def validate_for(self, shape: tuple[int, ...]) -> None:
        """Checks the trigger can be applied to ``(C, H, W)`` images.

        Raises:
            ShapeMismatchError: If the patch does not fit or the blend
                pattern has another shape.
        """
        if len(shape) != 3:
            raise ShapeMismatchError(f"Images must be (C, H, W), got {tuple(shape)!r}")
        params = self.params
        if isinstance(params, BadNetsParams):
            if params.patch_size > min(shape[1], shape[2]):
                raise ShapeMismatchError(
                    f"A {params.patch_size}x{params.patch_size} patch does not fit "
                    f"{shape[1]}x{shape[2]} images"
                )
        elif isinstance(params, BlendParams):
            params.pattern_for(shape)

    def to_dict(self) -> dict[str, Any]:
        """Plain mapping for configs and manifests.

        Raises:
            InvalidConfigError: For blend triggers with an explicit pattern
                array, which has no textual form.
        """
        params = self.params
        body: dict[str, Any] = {"kind": self.name, "target_label": self.target_label}
        if isinstance(params, BadNetsParams):
            body.update(
                patch_size=params.patch_size,
                corner=params.corner.value,
                value=params.value,
            )
        elif isinstance(params, BlendParams):
            if params.pattern is not None:
                raise InvalidConfigError(
                    "A blend trigger with an explicit pattern cannot be serialized"
                )
            body.update(alpha=params.alpha, pattern_seed=params.pattern_seed)
        else:
            body.update(grid_k=params.grid_k, strength=params.strength, seed=params.seed)
        return body

    @classmethod
    def from_dict(cls, body: dict[str, Any]) -> "TriggerSpec":
        """Inverse of :meth:`to_dict`; missing keys take their defaults."""
        body = dict(body)
        try:
            kind = TriggerKind(str(body.pop("kind")).lower())
        except (KeyError, ValueError) as exc:
            valid = ", ".join(k.value for k in TriggerKind)
            raise InvalidConfigError(
                f"Trigger needs a 'kind' out of: {valid}; got {body!r}"
            ) from exc
        target = int(body.pop("target_label", 0))
        try:
            if kind is TriggerKind.BADNETS:
                if "corner" in body:
                    body["corner"] = Corner(body["corner"])
                return cls(BadNetsParams(**body), target)
            if kind is TriggerKind.BLEND:
                return cls(BlendParams(**body), target)
            return cls(WaNetParams(**body), target)
        except TypeError as exc:
            raise InvalidConfigError(f"Bad {kind.value} trigger fields: {exc}") from exc


@lru_cache(maxsize=16)
def _noise_pattern(seed: int, shape: tuple[int, ...]) -> np.ndarray:
    pattern = np.random.default_rng(seed).uniform(0.0, 1.0, size=shape)
    pattern.setflags(write=False)
    return pattern


@lru_cache(maxsize=16)
def _warp_field(grid_k: int, strength: float, seed: int, height: int, width: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    control = rng.uniform(-1.0, 1.0, size=(2, grid_k, grid_k))
    control = control / np.mean(np.abs(control))

    grid_r, grid_c = np.meshgrid(
        np.linspace(0, grid_k - 1, height),
        np.linspace(0, grid_k - 1, width),
        indexing="ij",
    )
    noise = np.stack(
        [map_coordinates(control[i], [grid_r, grid_c], order=1) for i in range(2)]
    )

    rows, cols = np.meshgrid(
        np.arange(height, dtype=np.float64),
        np.arange(width, dtype=np.float64),
        indexing="ij",
    )
    rows = np.clip(rows + strength * noise[0] * (height - 1) / (2 * height), 0, height - 1)
    cols = np.clip(cols + strength * noise[1] * (width - 1) / (2 * width), 0, width - 1)
    field = np.stack([rows, cols])
    field.setflags(write=False)
    return field


def warp_field(params: WaNetParams, height: int, width: int) -> np.ndarray:
    """Sampling coordinates ``(2, H, W)`` (row, column) of a WaNet warp."""
    return _warp_field(params.grid_k, float(params.strength), params.seed, height, width)


def apply_trigger(x: np.ndarray, spec: TriggerSpec) -> np.ndarray:
    """Applies ``spec`` to one image ``(C, H, W)`` or a batch ``(N, C, H, W)``.

    Raises:
        ShapeMismatchError: If the trigger does not fit the image shape.
    """
    x = np.asarray(x)
    single = x.ndim == 3
    batch = x[None] if single else x
    if batch.ndim != 4:
        raise ShapeMismatchError(f"Expected (C, H, W) or (N, C, H, W), got {x.shape!r}")
    spec.validate_for(batch.shape[1:])
    params = spec.params

    if isinstance(params, BadNetsParams):
        out = batch.copy()
        size = params.patch_size
        rows = slice(-size, None) if "bottom" in params.corner.value else slice(0, size)
        cols = slice(-size, None) if "right" in params.corner.value else slice(0, size)
        out[:, :, rows, cols] = params.value
    elif isinstance(params, BlendParams):
        pattern = params.pattern_for(batch.shape[1:]).astype(batch.dtype)
        out = (1 - params.alpha) * batch + params.alpha * pattern
        out = enforce_linf_bound(np.clip(out, 0.0, 1.0), batch, params.alpha)
    else:
        n, c, h, w = batch.shape
        field = warp_field(params, h, w)
        coords = np.empty((4, n, c, h, w), dtype=np.float64)
        coords[0] = np.arange(n)[:, None, None, None]
        coords[1] = np.arange(c)[None, :, None, None]
        coords[2] = field[0]
        coords[3] = field[1]
        out = map_coordinates(batch, coords, order=1, mode="nearest")
        out = np.clip(out, 0.0, 1.0)
    out = out.astype(batch.dtype, copy=False)
    return out[0] if single else out

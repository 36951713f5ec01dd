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

"""Labeled image collections."""

import hashlib
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional

import numpy as np

from latentdoor.errors import (
    EmptyEvaluationSetError,
    InvalidConfigError,
    LabelOutOfRangeError,
    ShapeMismatchError,
)


class Split(Enum):
    """Role of a dataset in an experiment."""

    TRAIN = "train"
    VAL = "val"
    TEST = "test"


@dataclass(frozen=True, eq=False)
class LabeledImage:
    """One sample: ``(C, H, W)`` pixels in [0, 1], a class index and a stable id."""

    pixels: np.ndarray
    label: int
    id: int


@dataclass(frozen=True, eq=False)
class Dataset:
    """A non-empty set of equally shaped images with labels.

    Images are stored as one ``(N, C, H, W)`` float32 array. Sample ids
    default to positions and survive :meth:`subset`, so a sample keeps its
    id however the set is filtered.

    Raises:
        EmptyEvaluationSetError: If there are no samples.
        ShapeMismatchError: If the arrays do not line up.
        LabelOutOfRangeError: If a label is not below ``num_classes``.
        InvalidConfigError: If a pixel lies outside [0, 1].
    """

    images: np.ndarray
    labels: np.ndarray
    num_classes: int
    split: Split = Split.TRAIN
    ids: Optional[np.ndarray] = field(default=None)

    def __post_init__(self):
        images = np.array(self.images, dtype=np.float32, order="C")
        labels = np.array(self.labels, dtype=np.int64)
        if images.ndim != 4:
            raise ShapeMismatchError(
                f"images must be (N, C, H, W), got {images.shape!r}"
            )
        if labels.shape != (images.shape[0],):
            raise ShapeMismatchError(
                f"{labels.shape!r} labels for {images.shape[0]} images"
            )
        if images.shape[0] == 0:
            raise EmptyEvaluationSetError(f"The {self.split.value} dataset is empty")
        if self.num_classes < 2:
            raise InvalidConfigError(
                f"num_classes must be >= 2, got {self.num_classes!r}"
            )
        if labels.min() < 0 or labels.max() >= self.num_classes:
            raise LabelOutOfRangeError(
                f"Labels must lie in [0, {self.num_classes}), got range "
                f"[{labels.min()}, {labels.max()}]"
            )
        if not np.all(np.isfinite(images)) or images.min() < 0 or images.max() > 1:
            raise InvalidConfigError("Pixels must be finite and lie in [0, 1]")
        ids = (
            np.arange(images.shape[0], dtype=np.int64)
            if self.ids is None
            else np.array(self.ids, dtype=np.int64)
        )
        if ids.shape != labels.shape:
            raise ShapeMismatchError(f"{ids.shape!r} ids for {labels.shape[0]} samples")
        images.setflags(write=False)
        labels.setflags(write=False)
        ids.setflags(write=False)
        object.__setattr__(self, "images", images)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "ids", ids)

    def __len__(self) -> int:
        return self.images.shape[0]

    def __getitem__(self, index: int) -> LabeledImage:
        return LabeledImage(
            self.images[index], int(self.labels[index]), int(self.ids[index])  # type: ignore[index]
        )

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    @property
    def sample_shape(self) -> tuple[int, int, int]:
        return tuple(self.images.shape[1:])  # type: ignore[return-value]

    def subset(self, indices: np.ndarray, split: Optional[Split] = None) -> "Dataset":
        """Samples at ``indices`` (positions), keeping their ids."""
        indices = np.asarray(indices, dtype=np.int64)
        return Dataset(
            self.images[indices],
            self.labels[indices],
            self.num_classes,
            split or self.split,
            self.ids[indices],  # type: ignore[index]
        )

    def where(self, mask: np.ndarray) -> "Dataset":
        """Samples where ``mask`` is true; raises ``EmptyEvaluationSetError`` if none."""
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != self.labels.shape:
            raise ShapeMismatchError(f"Mask of shape {mask.shape!r} for {len(self)} samples")
        return self.subset(np.flatnonzero(mask))

    def with_split(self, split: Split) -> "Dataset":
        return replace(self, split=split)

    def with_images(self, images: np.ndarray, labels: Optional[np.ndarray] = None) -> "Dataset":
        """Same ids and split with replaced pixels (and optionally labels)."""
        return Dataset(
            images,
            self.labels if labels is None else labels,
            self.num_classes,
            self.split,
            self.ids,
        )

    def class_counts(self) -> np.ndarray:
        """Number of samples per class, length ``num_classes``."""
        return np.bincount(self.labels, minlength=self.num_classes)

    def fingerprint(self) -> str:
        """SHA-256 over shape, class count, labels and pixels."""
        digest = hashlib.sha256()
        digest.update(repr((self.images.shape, self.num_classes)).encode("ascii"))
        digest.update(self.labels.astype("<i8").tobytes())
        digest.update(self.images.astype("<f4").tobytes())
        return digest.hexdigest()

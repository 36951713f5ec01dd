"""Synthetic desk-scale image classes.

Every class owns a prototype: a blob colour and a blob scale. A sample is
a grey background with one Gaussian blob of its class colour, placed at a
random position, plus pixel noise. Colour and scale survive global pooling,
so a small pooled CNN learns the classes quickly, while position and noise
keep the task from being a lookup.

With three channels and at most seven classes the colours are corners of
the cube ``{0.25, 0.75}³`` (skipping the all-low corner); otherwise they
are drawn uniformly from ``[0.15, 0.85]``.
"""

from dataclasses import dataclass

import numpy as np

from latentdoor.data.dataset import Dataset, Split
from latentdoor.errors import InvalidConfigError

_BACKGROUND = 0.5
_NOISE = 0.04
_COLOUR_JITTER = 0.03


@dataclass(frozen=True, eq=False)
class _Prototypes:
    colours: np.ndarray  # (m, C)
    sigmas: np.ndarray  # (m,), in pixels


def _validate(num_classes: int, per_class: int, shape: tuple[int, int, int]) -> None:
    if num_classes < 2:
        raise InvalidConfigError(f"num_classes must be >= 2, got {num_classes!r}")
    if per_class < 10:
        raise InvalidConfigError(f"per_class must be >= 10, got {per_class!r}")
    if len(shape) != 3 or min(shape) < 1:
        raise InvalidConfigError(f"shape must be (C, H, W), got {shape!r}")


def _prototypes(
    num_classes: int, shape: tuple[int, int, int], rng: np.random.Generator
) -> _Prototypes:
    channels, height, width = shape
    if channels == 3 and num_classes <= 7:
        bits = (np.arange(1, num_classes + 1)[:, None] >> np.arange(3)) & 1
        colours = 0.25 + 0.5 * bits.astype(np.float64)
    else:
        colours = rng.uniform(0.15, 0.85, size=(num_classes, channels))
    scale = np.linspace(0.18, 0.3, num_classes)
    return _Prototypes(colours, scale * min(height, width))


def _render(
    protos: _Prototypes,
    per_class: int,
    shape: tuple[int, int, int],
    rng: np.random.Generator,
    split: Split,
) -> Dataset:
    channels, height, width = shape
    num_classes = len(protos.sigmas)
    labels = rng.permutation(np.repeat(np.arange(num_classes), per_class))
    count = labels.size

    rows = np.arange(height, dtype=np.float64)[None, :, None]
    cols = np.arange(width, dtype=np.float64)[None, None, :]
    centre_r = rng.uniform(0.3, 0.7, count)[:, None, None] * (height - 1)
    centre_c = rng.uniform(0.3, 0.7, count)[:, None, None] * (width - 1)
    sigma = protos.sigmas[labels][:, None, None]
    blob = np.exp(-((rows - centre_r) ** 2 + (cols - centre_c) ** 2) / (2 * sigma**2))

    colour = protos.colours[labels] + rng.normal(0, _COLOUR_JITTER, (count, channels))
    background = _BACKGROUND + rng.normal(0, _COLOUR_JITTER, (count, 1))
    blob = blob[:, None]
    images = background[:, :, None, None] * (1 - blob) + colour[:, :, None, None] * blob
    images = images + rng.normal(0, _NOISE, images.shape)
    return Dataset(np.clip(images, 0.0, 1.0), labels, num_classes, split)


def synth_dataset(
    num_classes: int,
    per_class: int,
    shape: tuple[int, int, int],
    seed: int,
    split: Split = Split.TRAIN,
) -> Dataset:
    """Balanced synthetic dataset, bitwise-reproducible from ``seed``.

    Raises:
        InvalidConfigError: If ``num_classes < 2`` or ``per_class < 10``.
    """
    _validate(num_classes, per_class, shape)
    proto_seq, sample_seq = np.random.SeedSequence(seed).spawn(2)
    protos = _prototypes(num_classes, shape, np.random.default_rng(proto_seq))
    return _render(protos, per_class, shape, np.random.default_rng(sample_seq), split)


def synth_splits(  # pylint: disable=R0913
    num_classes: int,
    train_per_class: int,
    val_per_class: int,
    test_per_class: int,
    shape: tuple[int, int, int],
    seed: int,
) -> tuple[Dataset, Dataset, Dataset]:
    """Train, validation and test sets drawn from one shared prototype family."""
    for per_class in (train_per_class, val_per_class, test_per_class):
        _validate(num_classes, per_class, shape)
    proto_seq, *split_seqs = np.random.SeedSequence(seed).spawn(4)
    protos = _prototypes(num_classes, shape, np.random.default_rng(proto_seq))
    counts = (train_per_class, val_per_class, test_per_class)
    splits = (Split.TRAIN, Split.VAL, Split.TEST)
    train, val, test = (
        _render(protos, per_class, shape, np.random.default_rng(seq), split)
        for per_class, seq, split in zip(counts, split_seqs, splits)
    )
    return train, val, test

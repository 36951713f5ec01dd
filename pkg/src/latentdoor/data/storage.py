"""The ``BDLD`` dataset file format.

Little-endian header ``magic "BDLD" | version u16 | count u32 | C, H, W u32 |
classes u8`` followed by ``count`` records of ``label u16`` and
``C*H*W`` single-precision pixels.
"""

import struct

import numpy as np

from latentdoor.data.dataset import Dataset, Split
from latentdoor.errors import FormatError
from latentdoor.fileio import PathLike, atomic_write_bytes, read_bytes

DATASET_MAGIC = b"BDLD"
DATASET_VERSION = 1

_HEADER = struct.Struct("<4sHIIIIB")


def _record_dtype(shape: tuple[int, int, int]) -> np.dtype:
    return np.dtype([("label", "<u2"), ("pixels", "<f4", shape)])


def dumps_dataset(ds: Dataset) -> bytes:
    """Serializes ``ds`` (ids and split are not stored)."""
    if ds.num_classes > 255:
        raise FormatError(f"BDLD stores at most 255 classes, got {ds.num_classes}")
    records = np.empty(len(ds), dtype=_record_dtype(ds.sample_shape))
    records["label"] = ds.labels
    records["pixels"] = ds.images
    header = _HEADER.pack(
        DATASET_MAGIC, DATASET_VERSION, len(ds), *ds.sample_shape, ds.num_classes
    )
    return header + records.tobytes()


def loads_dataset(payload: bytes, split: Split = Split.TRAIN) -> Dataset:
    """Parses BDLD bytes.

    Raises:
        FormatError: On a bad magic or version, a truncated or oversized
            payload, a label beyond the class count, or pixels outside [0, 1].
    """
    if len(payload) < _HEADER.size:
        raise FormatError("Truncated dataset file: header incomplete")
    magic, version, count, c, h, w, classes = _HEADER.unpack_from(payload)
    if magic != DATASET_MAGIC:
        raise FormatError(f"Not a BDLD dataset file (magic {magic!r})")
    if version != DATASET_VERSION:
        raise FormatError(f"Unsupported BDLD version {version}")
    record = _record_dtype((c, h, w))
    expected = _HEADER.size + count * record.itemsize
    if len(payload) != expected:
        raise FormatError(
            f"Dataset file holds {len(payload)} bytes, header implies {expected}"
        )
    records = np.frombuffer(payload, dtype=record, count=count, offset=_HEADER.size)
    labels = records["label"].astype(np.int64)
    if count and labels.max() >= classes:
        raise FormatError(
            f"Label {labels.max()} is out of range for {classes} classes"
        )
    try:
        return Dataset(records["pixels"].astype(np.float32), labels, classes, split)
    except ValueError as exc:
        raise FormatError(f"Invalid dataset payload: {exc}") from exc


def save_dataset(ds: Dataset, path: PathLike) -> None:
    atomic_write_bytes(path, dumps_dataset(ds))


def load_dataset(path: PathLike, split: Split = Split.TRAIN) -> Dataset:
    """Reads a BDLD file; a missing file raises ``MissingArtifactError``."""
    return loads_dataset(read_bytes(path, "dataset file"), split)

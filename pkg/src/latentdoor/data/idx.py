"""Importer for raw IDX files (the MNIST container format).

An IDX file starts with two zero bytes, a type code and the number of
dimensions, then one big-endian ``u32`` per dimension and the big-endian
payload. Gzip-compressed files are detected by their magic bytes.
"""

import gzip
import logging
from typing import Optional

import numpy as np

from latentdoor.data.dataset import Dataset, Split
from latentdoor.errors import FormatError, ShapeMismatchError
from latentdoor.fileio import PathLike, read_bytes

logger = logging.getLogger(__name__)

_IDX_TYPES = {
    0x08: np.dtype(">u1"),
    0x09: np.dtype(">i1"),
    0x0B: np.dtype(">i2"),
    0x0C: np.dtype(">i4"),
    0x0D: np.dtype(">f4"),
    0x0E: np.dtype(">f8"),
}


def parse_idx(payload: bytes) -> np.ndarray:
    """Decodes IDX bytes (optionally gzip-compressed) into an array."""
    if payload[:2] == b"\x1f\x8b":
        payload = gzip.decompress(payload)
    if len(payload) < 4 or payload[:2] != b"\x00\x00":
        raise FormatError("Not an IDX file")
    type_code, ndim = payload[2], payload[3]
    if type_code not in _IDX_TYPES:
        raise FormatError(f"Unknown IDX type code 0x{type_code:02x}")
    header = 4 + 4 * ndim
    if len(payload) < header:
        raise FormatError("Truncated IDX header")
    dims = tuple(int(d) for d in np.frombuffer(payload, ">u4", count=ndim, offset=4))
    dtype = _IDX_TYPES[type_code]
    expected = header + int(np.prod(dims, dtype=np.int64)) * dtype.itemsize
    if len(payload) != expected:
        raise FormatError(f"IDX payload holds {len(payload)} bytes, header implies {expected}")
    return np.frombuffer(payload, dtype, offset=header).reshape(dims)


def load_idx(path: PathLike) -> np.ndarray:
    return parse_idx(read_bytes(path, "IDX file"))


def import_idx_dataset(
    images_path: PathLike,
    labels_path: PathLike,
    num_classes: Optional[int] = None,
    split: Split = Split.TRAIN,
) -> Dataset:
    """Builds a single-channel dataset from an IDX image file and label file.

    Integer images are scaled by the maximum of their type (255 for bytes);
    float images are used as they are.
    """
    images = load_idx(images_path)
    labels = load_idx(labels_path).astype(np.int64)
    if images.ndim != 3:
        raise ShapeMismatchError(f"IDX images must be (N, H, W), got {images.shape!r}")
    if np.issubdtype(images.dtype, np.integer):
        scaled = images.astype(np.float64) / np.iinfo(images.dtype).max
    else:
        scaled = images.astype(np.float64)
    classes = num_classes if num_classes is not None else int(labels.max()) + 1
    logger.info("Imported %d IDX images of %dx%d", *images.shape)
    return Dataset(np.clip(scaled, 0.0, 1.0)[:, None], labels, classes, split)

"""BDLD dataset files and IDX import."""

import gzip
import struct

import numpy as np
import pytest

from latentdoor.data import (
    DATASET_MAGIC,
    Split,
    dumps_dataset,
    import_idx_dataset,
    load_dataset,
    loads_dataset,
    parse_idx,
    save_dataset,
)
from latentdoor.errors import FormatError, MissingArtifactError


def _idx(array: np.ndarray, type_code: int) -> bytes:
    header = bytes([0, 0, type_code, array.ndim]) + struct.pack(f">{array.ndim}I", *array.shape)
    return header + array.tobytes()


def test_round_trip_through_file(small_set, tmp_path):
    path = tmp_path / "data" / "train.bdld"
    save_dataset(small_set, path)
    loaded = load_dataset(path, Split.TEST)
    np.testing.assert_array_equal(loaded.images, small_set.images)
    np.testing.assert_array_equal(loaded.labels, small_set.labels)
    assert loaded.split is Split.TEST
    assert loaded.fingerprint() == small_set.fingerprint()


def test_header(small_set):
    payload = dumps_dataset(small_set)
    assert payload[:4] == DATASET_MAGIC
    assert len(payload) == 23 + 40 * (2 + 4 * 3 * 16 * 16)


class TestCorruptFiles:
    def test_bad_magic(self, small_set):
        with pytest.raises(FormatError, match="magic"):
            loads_dataset(b"NOPE" + dumps_dataset(small_set)[4:])

    def test_truncated(self, small_set):
        with pytest.raises(FormatError, match="header implies"):
            loads_dataset(dumps_dataset(small_set)[:-1])

    def test_short_header(self):
        with pytest.raises(FormatError, match="header incomplete"):
            loads_dataset(b"BDLD")

    def test_missing(self, tmp_path):
        with pytest.raises(MissingArtifactError):
            load_dataset(tmp_path / "nowhere.bdld")


class TestIdx:
    def test_parse_gzip(self):
        array = np.arange(6, dtype=">u1").reshape(2, 3)
        np.testing.assert_array_equal(parse_idx(gzip.compress(_idx(array, 0x08))), array)

    def test_unknown_type_code(self):
        with pytest.raises(FormatError, match="type code"):
            parse_idx(bytes([0, 0, 0x42, 1]) + struct.pack(">I", 0))

    def test_not_idx(self):
        with pytest.raises(FormatError, match="Not an IDX"):
            parse_idx(b"\x01\x02\x03\x04")

    def test_import_scales_bytes(self, tmp_path):
        images = np.full((4, 8, 8), 255, dtype=np.uint8)
        images[1] = 0
        labels = np.array([0, 1, 2, 1], dtype=np.uint8)
        (tmp_path / "images.idx").write_bytes(_idx(images, 0x08))
        (tmp_path / "labels.idx").write_bytes(_idx(labels, 0x08))
        ds = import_idx_dataset(tmp_path / "images.idx", tmp_path / "labels.idx")
        assert ds.sample_shape == (1, 8, 8)
        assert ds.num_classes == 3
        assert ds.images[0].max() == 1.0 and ds.images[1].max() == 0.0

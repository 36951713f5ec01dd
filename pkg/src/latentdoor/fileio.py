"""Atomic artifact writes and checked artifact reads."""

import os
import tempfile
from pathlib import Path
from typing import Union

from latentdoor.errors import MissingArtifactError

PathLike = Union[str, os.PathLike]


def atomic_write_bytes(path: PathLike, payload: bytes) -> Path:
    """Writes ``payload`` to ``path`` through a temporary file and a rename.

    Readers never observe a half-written artifact: the temporary file lives
    in the destination directory and is moved into place with
    ``os.replace``, which is atomic on POSIX and Windows.

    Args:
        path: Destination file. Parent directories are created.
        payload: Bytes to write.

    Returns:
        Path: The destination path.
    """
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{target.name}.", dir=target.parent)
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(payload)
        os.replace(tmp_name, target)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    return target


def atomic_write_text(path: PathLike, text: str) -> Path:
    """UTF-8 text variant of :func:`atomic_write_bytes`."""
    return atomic_write_bytes(path, text.encode("utf-8"))


def read_bytes(path: PathLike, what: str = "artifact") -> bytes:
    """Reads a whole artifact, naming it in the error when it is missing.

    Raises:
        MissingArtifactError: If ``path`` does not exist.
    """
    source = Path(path)
    if not source.is_file():
        raise MissingArtifactError(f"Missing {what}: {str(source)!r}")
    return source.read_bytes()


def read_text(path: PathLike, what: str = "artifact") -> str:
    """UTF-8 text variant of :func:`read_bytes`."""
    return read_bytes(path, what).decode("utf-8")

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

"""Array conventions shared by every layer of the lab.

Tensors are plain row-major ``numpy.ndarray`` values. Operations are
batch-first: a leading sample axis is always present inside the layer
machinery, and the public network API accepts either one sample or a batch.
"""

from enum import Enum
from typing import Type

import numpy as np

from latentdoor.errors import NonFiniteValueError, ShapeMismatchError


class Precision(Enum):
    """Floating-point precision an experiment is built in."""

    SINGLE = "single"
    DOUBLE = "double"

    @property
    def dtype(self) -> np.dtype:
        """The numpy dtype realising this precision."""
        return np.dtype(np.float32 if self is Precision.SINGLE else np.float64)

    @classmethod
    def from_dtype(cls, dtype) -> "Precision":
        """Maps ``float32``/``float64`` back to a precision member."""
        return cls.DOUBLE if np.dtype(dtype) == np.float64 else cls.SINGLE


def ensure_finite(
    array: np.ndarray,
    what: str,
    error: Type[NonFiniteValueError] = NonFiniteValueError,
) -> np.ndarray:
    """Returns ``array`` unchanged, raising ``error`` if it holds NaN or infinity."""
    if not np.all(np.isfinite(array)):
        raise error(f"Non-finite values in {what}")
    return array


def as_batch(
    x: np.ndarray, sample_shape: tuple[int, ...], what: str = "input"
) -> tuple[np.ndarray, bool]:
    """Normalises one sample or a batch into batch-first form.

    Args:
        x: A single sample of ``sample_shape`` or a batch of them.
        sample_shape: The declared per-sample shape.
        what: Name used in error messages.

    Returns:
        tuple: The batch and whether ``x`` was a single sample.

    Raises:
        ShapeMismatchError: If ``x`` is neither form.
    """
    x = np.asarray(x)
    if x.shape == tuple(sample_shape):
        return x[None], True
    if x.ndim == len(sample_shape) + 1 and x.shape[1:] == tuple(sample_shape):
        return x, False
    raise ShapeMismatchError(
        f"{what} has shape {x.shape!r}; expected {tuple(sample_shape)!r} "
        f"or a batch of it"
    )


def enforce_linf_bound(
    candidate: np.ndarray, reference: np.ndarray, bound: float
) -> np.ndarray:
    """Nudges entries toward ``reference`` until ``|candidate - reference| <= bound``.

    The distance is measured in double precision, so a single-precision
    result that overshoots by rounding is walked back one ulp at a time.
    Moving toward the reference never leaves the interval spanned by the
    two values.
    """
    out = np.array(candidate, copy=True)
    ref = np.asarray(reference, dtype=out.dtype)
    for _ in range(8):
        over = np.abs(out.astype(np.float64) - ref.astype(np.float64)) > bound
        if not over.any():
            break
        out[over] = np.nextafter(out[over], ref[over])
    return out


def linf_project(candidate: np.ndarray, origin: np.ndarray, epsilon: float) -> np.ndarray:
    """Projects onto the ℓ∞ ball of radius ``epsilon`` around ``origin``, inside [0, 1].

    ``origin`` must itself lie in [0, 1]. The returned array has the dtype
    of ``candidate`` and satisfies the bound exactly when measured in
    double precision.
    """
    dtype = np.asarray(candidate).dtype
    origin = np.asarray(origin, dtype=dtype)
    projected = np.clip(candidate, origin - epsilon, origin + epsilon)
    projected = np.clip(projected, 0.0, 1.0).astype(dtype, copy=False)
    return enforce_linf_bound(projected, origin, epsilon)


def linf_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Largest absolute entry-wise difference, in double precision."""
    diff = np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)
    return float(np.max(np.abs(diff))) if diff.size else 0.0

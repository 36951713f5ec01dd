"""Central finite differences, used as the oracle for every analytic gradient."""

from typing import Callable

import numpy as np

from latentdoor.errors import InvalidConfigError, NonFiniteValueError


def finite_difference_grad(
    fn: Callable[[np.ndarray], float], point: np.ndarray, step: float = 1e-5
) -> np.ndarray:
    """Estimates ``∇fn(point)`` component by component.

    Each entry is ``(fn(x + h e_i) - fn(x - h e_i)) / 2h``, evaluated in
    double precision on a private copy of ``point``.

    Args:
        fn: Scalar function of an array shaped like ``point``.
        point: Where to differentiate.
        step: The half-width ``h``; must be positive.

    Returns:
        np.ndarray: Gradient estimate shaped like ``point`` (float64).

    Raises:
        InvalidConfigError: If ``step`` is not positive.
        NonFiniteValueError: If ``fn`` returns NaN or infinity.
    """
    if not step > 0:
        raise InvalidConfigError(f"Finite-difference step must be > 0, got {step!r}")
    x = np.array(point, dtype=np.float64, copy=True)
    grad = np.zeros_like(x)
    for index in np.ndindex(x.shape):
        original = x[index]
        x[index] = original + step
        upper = float(fn(x))
        x[index] = original - step
        lower = float(fn(x))
        x[index] = original
        if not (np.isfinite(upper) and np.isfinite(lower)):
            raise NonFiniteValueError(
                f"Function value is not finite near index {index!r}"
            )
        grad[index] = (upper - lower) / (2 * step)
    return grad


def relative_error(actual: np.ndarray, expected: np.ndarray, floor: float = 1e-8) -> float:
    """``‖actual - expected‖∞ / max(‖actual‖∞, ‖expected‖∞, floor)``."""
    actual = np.asarray(actual, dtype=np.float64)
    expected = np.asarray(expected, dtype=np.float64)
    scale = max(
        float(np.max(np.abs(actual), initial=0.0)),
        float(np.max(np.abs(expected), initial=0.0)),
        floor,
    )
    return float(np.max(np.abs(actual - expected), initial=0.0)) / scale

"""Perceptual similarity between clean and perturbed images."""

import numpy as np
from skimage.metrics import structural_similarity

from latentdoor.errors import ImageTooSmallError, ShapeMismatchError

#: Side of the Gaussian SSIM window (σ = 1.5).
SSIM_WINDOW = 11


def ssim(x: np.ndarray, y: np.ndarray) -> float:
    """Mean local SSIM of two ``(C, H, W)`` images in [0, 1], averaged over channels.

    Uses an 11x11 Gaussian window with σ = 1.5, ``L = 1`` and the standard
    constants ``C1 = (0.01 L)²``, ``C2 = (0.03 L)²``.

    Raises:
        ShapeMismatchError: If the shapes differ or are not ``(C, H, W)``.
        ImageTooSmallError: If a side is shorter than the window.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 3:
        raise ShapeMismatchError(
            f"ssim needs two (C, H, W) images of one shape, got {x.shape!r} and {y.shape!r}"
        )
    if min(x.shape[1:]) < SSIM_WINDOW:
        raise ImageTooSmallError(
            f"Images of {x.shape[1]}x{x.shape[2]} are smaller than the "
            f"{SSIM_WINDOW}x{SSIM_WINDOW} SSIM window"
        )
    if np.array_equal(x, y):
        return 1.0
    return float(
        structural_similarity(
            x,
            y,
            win_size=SSIM_WINDOW,
            channel_axis=0,
            data_range=1.0,
            gaussian_weights=True,
            sigma=1.5,
            use_sample_covariance=False,
        )
    )


def mean_ssim(clean: np.ndarray, perturbed: np.ndarray) -> float:
    """Average :func:`ssim` over two aligned batches ``(N, C, H, W)``."""
    clean = np.asarray(clean)
    perturbed = np.asarray(perturbed)
    if clean.shape != perturbed.shape or clean.ndim != 4 or len(clean) == 0:
        raise ShapeMismatchError(
            f"mean_ssim needs two non-empty aligned batches, got {clean.shape!r} "
            f"and {perturbed.shape!r}"
        )
    return float(np.mean([ssim(a, b) for a, b in zip(clean, perturbed)]))

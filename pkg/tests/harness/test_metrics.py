"""SSIM between clean and perturbed images."""

import numpy as np
import pytest

from latentdoor.errors import ImageTooSmallError, ShapeMismatchError
from latentdoor.harness import SSIM_WINDOW, mean_ssim, ssim


@pytest.fixture(name="image")
def image_fixture():
    return np.random.default_rng(0).uniform(0.2, 0.8, size=(3, 16, 16))


def test_identical_images(image):
    assert ssim(image, image.copy()) == 1.0


def test_perturbation_lowers_similarity(image):
    noisy = np.clip(image + np.random.default_rng(1).normal(0, 0.2, image.shape), 0, 1)
    value = ssim(image, noisy)
    assert -1.0 <= value < 1.0
    assert ssim(image, np.clip(image + 0.01, 0, 1)) > value


def test_symmetric(image):
    other = np.clip(image[:, ::-1, :], 0, 1)
    assert ssim(image, other) == pytest.approx(ssim(other, image))


def test_window_size():
    small = np.zeros((1, SSIM_WINDOW - 1, 16))
    with pytest.raises(ImageTooSmallError, match="window"):
        ssim(small, small)


def test_shapes_must_agree(image):
    with pytest.raises(ShapeMismatchError):
        ssim(image, image[:2])
    with pytest.raises(ShapeMismatchError):
        ssim(image[0], image[0])


def test_batch_mean(image):
    batch = np.stack([image, image])
    noisy = batch.copy()
    noisy[1] = np.clip(noisy[1] + 0.1, 0, 1)
    assert mean_ssim(batch, noisy) == pytest.approx((1.0 + ssim(image, noisy[1])) / 2)
    with pytest.raises(ShapeMismatchError):
        mean_ssim(batch[:0], noisy[:0])

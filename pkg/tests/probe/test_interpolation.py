"""Interpolating features along the backdoor direction."""

import numpy as np
import pytest

from latentdoor.data import Split
from latentdoor.errors import InvalidConfigError
from latentdoor.numerics import softmax
from latentdoor.probe import (
    DEFAULT_ALPHAS,
    BackdoorDirection,
    interpolation_candidates,
    interpolation_probe,
)


@pytest.fixture(name="candidates")
def candidates_fixture(net, val):
    return val.where(val.labels != 0)


@pytest.fixture(name="pinned")
def pinned_fixture(net, candidates):
    """A direction whose recorded per-sample displacement is zero for every candidate."""
    vector = np.zeros(net.feature_dim)
    vector[0] = 1.0
    return BackdoorDirection(
        vector=vector,
        layer_tag=net.layer_tag,
        n_samples=len(candidates),
        mean_displacement=5.0,
        per_sample_displacement={int(i): 0.0 for i in candidates.ids},
        target_label=0,
        source_split="val",
    )


def test_default_grid():
    assert DEFAULT_ALPHAS[0] == 0.0 and DEFAULT_ALPHAS[-1] == 1.5
    assert len(DEFAULT_ALPHAS) == 31


def test_alpha_zero_is_the_clean_prediction(net, candidates, direction):
    curve = interpolation_probe(net, candidates, direction)
    expected = softmax(net.forward(candidates.images))[:, direction.target_label]
    np.testing.assert_allclose(curve.probabilities[:, 0], expected, rtol=1e-10)
    assert curve.n == len(candidates)
    np.testing.assert_array_equal(curve.sample_ids, candidates.ids)


def test_statistics(net, candidates, direction):
    curve = interpolation_probe(net, candidates, direction)
    np.testing.assert_allclose(curve.mean_prob, curve.probabilities.mean(axis=0))
    assert curve.mean_at(0.49) == pytest.approx(curve.mean_prob[10])
    assert np.all(curve.std_prob >= 0)


def test_per_sample_displacement_on_the_source_split(net, candidates, pinned):
    curve = interpolation_probe(net, candidates, pinned)
    for column in range(curve.probabilities.shape[1]):
        np.testing.assert_array_equal(curve.probabilities[:, column], curve.probabilities[:, 0])


def test_mean_displacement_on_other_splits(net, candidates, pinned):
    curve = interpolation_probe(net, candidates.with_split(Split.TEST), pinned)
    assert not np.allclose(curve.probabilities[:, -1], curve.probabilities[:, 0])


def test_target_class_samples_are_rejected(net, val, direction):
    with pytest.raises(InvalidConfigError, match="target class"):
        interpolation_probe(net, val, direction)


def test_alphas_must_increase(net, candidates, direction):
    with pytest.raises(InvalidConfigError, match="increasing"):
        interpolation_probe(net, candidates, direction, alphas=np.array([0.0, 1.0, 0.5]))


def test_candidates_are_correct_and_non_target(net, val):
    correct = val.labels[net.predict(val.images) == val.labels]
    target = int((correct[0] + 1) % val.num_classes)
    chosen = interpolation_candidates(net, val, target)
    assert len(chosen) > 0
    assert np.all(chosen.labels != target)
    np.testing.assert_array_equal(net.predict(chosen.images), chosen.labels)

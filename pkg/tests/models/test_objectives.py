"""Attack objectives and their input gradients.

Gradients are compared with central differences on a double-precision
network, using a small step so finite differences rarely straddle a ReLU
kink.
"""

import numpy as np
import pytest

from latentdoor.errors import InvalidConfigError, ShapeMismatchError
from latentdoor.models import (
    ObjectiveKind,
    ObjectiveSpec,
    evaluate_objective,
    feature_gradient,
    input_gradient,
)
from latentdoor.numerics import finite_difference_grad, relative_error


@pytest.fixture(name="direction")
def direction_fixture(tiny_net):
    vector = np.random.default_rng(9).standard_normal(tiny_net.feature_dim)
    return vector / np.linalg.norm(vector)


@pytest.mark.parametrize(
    "make",
    [
        lambda d: ObjectiveSpec.ce_toward(1),
        lambda d: ObjectiveSpec.negative_ce_toward(2),
        lambda d: ObjectiveSpec.guided(0, d, beta=0.7),
    ],
    ids=["ce_toward", "negative_ce_toward", "guided"],
)
def test_input_gradient_matches_finite_differences(tiny_net, images, direction, make):
    objective = make(direction)
    x = images[0]
    analytic = input_gradient(tiny_net, x, objective)
    numeric = finite_difference_grad(
        lambda z: float(evaluate_objective(tiny_net, z, objective)), x, step=1e-7
    )
    assert analytic.shape == x.shape
    assert relative_error(analytic, numeric) < 1e-4


def test_guided_with_zero_beta_is_bitwise_targeted(tiny_net, images, direction):
    guided = input_gradient(tiny_net, images, ObjectiveSpec.guided(1, direction, beta=0.0))
    targeted = input_gradient(tiny_net, images, ObjectiveSpec.negative_ce_toward(1))
    np.testing.assert_array_equal(guided, targeted)


def test_guided_value_adds_projection(tiny_net, images, direction):
    base = evaluate_objective(tiny_net, images, ObjectiveSpec.negative_ce_toward(0))
    guided = evaluate_objective(tiny_net, images, ObjectiveSpec.guided(0, direction, beta=2.0))
    projection = tiny_net.features_at(images) @ direction
    np.testing.assert_allclose(guided, base + 2.0 * projection, rtol=1e-12)


def test_ce_toward_is_negated_negative_ce(tiny_net, images):
    pos = evaluate_objective(tiny_net, images, ObjectiveSpec.ce_toward(2))
    neg = evaluate_objective(tiny_net, images, ObjectiveSpec.negative_ce_toward(2))
    np.testing.assert_array_equal(pos, -neg)


def test_feature_gradient_matches_finite_differences(tiny_net, images, direction):
    x = images[1]
    analytic = feature_gradient(tiny_net, x, direction)
    numeric = finite_difference_grad(
        lambda z: float(tiny_net.features_at(z) @ direction), x, step=1e-7
    )
    assert relative_error(analytic, numeric) < 1e-4


def test_per_sample_labels(tiny_net, images):
    labels = np.array([0, 1, 2, 0])
    values = evaluate_objective(tiny_net, images, ObjectiveSpec.ce_toward(labels))
    assert values.shape == (4,)
    with pytest.raises(ShapeMismatchError, match="labels"):
        evaluate_objective(tiny_net, images, ObjectiveSpec.ce_toward(labels[:2]))


class TestValidation:
    def test_guided_needs_direction(self):
        with pytest.raises(InvalidConfigError, match="direction"):
            ObjectiveSpec(ObjectiveKind.GUIDED, 0)

    def test_negative_beta(self):
        with pytest.raises(InvalidConfigError, match="beta"):
            ObjectiveSpec.guided(0, np.ones(3), beta=-1.0)

    def test_direction_on_plain_objective(self):
        with pytest.raises(InvalidConfigError, match="does not take"):
            ObjectiveSpec(ObjectiveKind.CE_TOWARD, 0, np.ones(3))

    def test_direction_length(self, tiny_net, images):
        with pytest.raises(ShapeMismatchError, match="length"):
            input_gradient(tiny_net, images, ObjectiveSpec.guided(0, np.ones(3), beta=1.0))

"""Trigger families: BadNets patch, blend and WaNet warp."""

import numpy as np
import pytest

from latentdoor.data import Corner, TriggerKind, TriggerSpec, apply_trigger, warp_field
from latentdoor.errors import InvalidConfigError, ShapeMismatchError


@pytest.fixture(name="image")
def image_fixture():
    return np.random.default_rng(8).uniform(0.0, 1.0, size=(3, 16, 16)).astype(np.float32)


class TestBadNets:
    def test_patch_in_bottom_right(self, image):
        out = apply_trigger(image, TriggerSpec.badnets(3, value=1.0))
        assert np.all(out[:, -3:, -3:] == 1.0)
        np.testing.assert_array_equal(out[:, :-3, :], image[:, :-3, :])
        np.testing.assert_array_equal(out[:, :, :-3], image[:, :, :-3])

    def test_top_left_corner(self, image):
        out = apply_trigger(image, TriggerSpec.badnets(2, Corner.TOP_LEFT, value=0.0))
        assert np.all(out[:, :2, :2] == 0.0)
        np.testing.assert_array_equal(out[:, 2:, :], image[:, 2:, :])

    def test_patch_must_fit(self):
        with pytest.raises(ShapeMismatchError, match="does not fit"):
            apply_trigger(np.zeros((1, 4, 4)), TriggerSpec.badnets(5))

    def test_patch_value_range(self):
        with pytest.raises(InvalidConfigError, match="value"):
            TriggerSpec.badnets(3, value=1.5)


class TestBlend:
    def test_moves_each_pixel_by_at_most_alpha(self, image):
        out = apply_trigger(image, TriggerSpec.blend(0.2, pattern_seed=1))
        diff = np.abs(out.astype(np.float64) - image.astype(np.float64))
        assert diff.max() <= 0.2
        assert out.min() >= 0.0 and out.max() <= 1.0

    def test_explicit_pattern(self, image):
        pattern = np.zeros((3, 16, 16))
        out = apply_trigger(image, TriggerSpec.blend(0.5, pattern=pattern))
        np.testing.assert_allclose(out, 0.5 * image, atol=1e-7)

    def test_pattern_shape_mismatch(self, image):
        with pytest.raises(ShapeMismatchError, match="pattern"):
            apply_trigger(image, TriggerSpec.blend(0.5, pattern=np.zeros((3, 8, 8))))

    def test_alpha_range(self):
        with pytest.raises(InvalidConfigError, match="alpha"):
            TriggerSpec.blend(1.0)


class TestWaNet:
    def test_zero_strength_is_identity(self, image):
        out = apply_trigger(image, TriggerSpec.wanet(4, 0.0))
        np.testing.assert_allclose(out, image, atol=1e-7)

    def test_warp_is_sample_independent(self, image):
        spec = TriggerSpec.wanet(4, 0.5, seed=3)
        batch = np.stack([image, image[::-1]])
        out = apply_trigger(batch, spec)
        np.testing.assert_allclose(out[0], apply_trigger(image, spec), atol=1e-6)
        np.testing.assert_allclose(out[1], apply_trigger(image[::-1], spec), atol=1e-6)

    def test_field_stays_inside_image(self):
        field = warp_field(TriggerSpec.wanet(4, 5.0).params, 16, 16)
        assert field.shape == (2, 16, 16)
        assert field.min() >= 0.0 and field.max() <= 15.0

    def test_changes_the_image(self, image):
        out = apply_trigger(image, TriggerSpec.wanet(4, 1.0))
        assert out.dtype == image.dtype
        assert not np.array_equal(out, image)

    def test_grid_size(self):
        with pytest.raises(InvalidConfigError, match="grid_k"):
            TriggerSpec.wanet(1)


def test_outputs_keep_dtype_and_range(image):
    for spec in (TriggerSpec.badnets(), TriggerSpec.blend(), TriggerSpec.wanet()):
        out = apply_trigger(image[None], spec)
        assert out.shape == (1, 3, 16, 16)
        assert out.dtype == np.float32
        assert out.min() >= 0.0 and out.max() <= 1.0


def test_names_and_kinds():
    assert TriggerSpec.badnets().kind is TriggerKind.BADNETS
    assert TriggerSpec.wanet().name == "wanet"


@pytest.mark.parametrize(
    "spec",
    [
        TriggerSpec.badnets(2, Corner.TOP_RIGHT, 0.8, target_label=1),
        TriggerSpec.blend(0.3, pattern_seed=5, target_label=2),
        TriggerSpec.wanet(3, 0.25, seed=9),
    ],
    ids=["badnets", "blend", "wanet"],
)
def test_dict_form_reproduces_the_trigger(spec, image):
    restored = TriggerSpec.from_dict(spec.to_dict())
    assert restored.to_dict() == spec.to_dict()
    np.testing.assert_array_equal(apply_trigger(image, restored), apply_trigger(image, spec))


def test_explicit_pattern_has_no_dict_form():
    with pytest.raises(InvalidConfigError, match="explicit pattern"):
        TriggerSpec.blend(0.2, pattern=np.zeros((1, 4, 4))).to_dict()


def test_unknown_kind():
    with pytest.raises(InvalidConfigError, match="kind"):
        TriggerSpec.from_dict({"kind": "sig"})


def test_negative_target_label():
    with pytest.raises(InvalidConfigError, match="target_label"):
        TriggerSpec.badnets(target_label=-1)

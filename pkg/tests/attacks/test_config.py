"""Attack configuration validation."""

import pytest

from latentdoor.attacks import AttackConfig, AttackKind
from latentdoor.errors import InvalidConfigError


@pytest.mark.parametrize(
    "changes, message",
    [
        ({"epsilon": -0.1}, "epsilon"),
        ({"epsilon": float("inf")}, "epsilon"),
        ({"steps": -1}, "steps"),
        ({"step_alpha": 0.0}, "step_alpha"),
        ({"beta": -1.0}, "beta"),
        ({"init_eta": -0.5}, "init_eta"),
        ({"target_label": -2}, "target_label"),
    ],
)
def test_rejected_settings(changes, message):
    with pytest.raises(InvalidConfigError, match=message):
        AttackConfig(AttackKind.FGA, **changes)


def test_zero_steps_do_not_need_a_step_size():
    cfg = AttackConfig.targeted(steps=0, step_alpha=0.0)
    assert cfg.steps == 0


def test_random_start_width():
    assert AttackConfig.untargeted(epsilon=0.1).eta == 0.1
    assert AttackConfig.untargeted(epsilon=0.1, init_eta=0.0).eta == 0.0


def test_evolve_revalidates():
    cfg = AttackConfig.feature_guided()
    assert cfg.evolve(beta=0.0).beta == 0.0
    with pytest.raises(InvalidConfigError):
        cfg.evolve(beta=-1.0)


def test_presets():
    assert AttackConfig.feature_guided().epsilon == pytest.approx(32 / 255)
    assert AttackConfig.feature_guided().steps == 200
    assert not AttackKind.UNTARGETED_PGD.is_targeted
    assert [k.short_name for k in AttackKind] == ["pgd", "tpgd", "fga"]

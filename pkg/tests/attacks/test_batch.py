"""Dataset-level attack runs and their summaries."""

import numpy as np
import pytest

from latentdoor.attacks import (
    DEFAULT_BETAS,
    AdversarialSet,
    AttackConfig,
    AttackOutcome,
    attackable,
    batch_attack,
    beta_sweep,
    label_distribution,
    stamp_adversarial_set,
    summarize,
)
from latentdoor.errors import EmptyEvaluationSetError, InvalidConfigError


def _outcome(sample_id, true_label, prediction, trace):
    return AttackOutcome(
        sample_id=sample_id,
        true_label=true_label,
        x_adv=np.zeros((1, 2, 2)),
        prediction=prediction,
        success=bool(trace[-1]),
        linf_norm=0.0,
        alignment=float("nan"),
        steps_run=len(trace) - 1,
        success_trace=np.array(trace, dtype=bool),
    )


@pytest.fixture(name="tpgd")
def tpgd_fixture():
    return AttackConfig.targeted(epsilon=8 / 255, step_alpha=2 / 255, steps=4, target_label=1)


def test_targeted_runs_skip_the_target_class(net, samples, tpgd):
    result = batch_attack(net, samples, tpgd)
    assert len(result) == int(np.sum(samples.labels != 1))
    assert all(o.true_label != 1 for o in result.outcomes)
    assert result.step_curve.shape == (tpgd.steps + 1,)
    assert np.all(np.diff(result.step_curve) >= 0)
    assert result.step_curve[-1] >= result.success_rate


def test_untargeted_runs_keep_every_sample(samples):
    assert len(attackable(samples, AttackConfig.untargeted())) == len(samples)


def test_thread_count_does_not_change_results(net, samples, direction):
    cfg = AttackConfig.feature_guided(epsilon=8 / 255, step_alpha=1 / 255, steps=4, seed=2,
                                      target_label=1)
    serial = batch_attack(net, samples, cfg, direction, threads=1, chunk_size=8)
    pooled = batch_attack(net, samples, cfg, direction, threads=4, chunk_size=8)
    np.testing.assert_array_equal(serial.sample_ids, pooled.sample_ids)
    np.testing.assert_array_equal(serial.adversarial_images, pooled.adversarial_images)
    assert serial.success_rate == pooled.success_rate
    assert serial.mean_alignment == pooled.mean_alignment


def test_guided_batch_needs_a_direction(net, samples):
    with pytest.raises(InvalidConfigError, match="direction"):
        batch_attack(net, samples, AttackConfig.feature_guided(steps=1))


def test_bad_worker_settings(net, samples, tpgd):
    with pytest.raises(InvalidConfigError, match="threads"):
        batch_attack(net, samples, tpgd, threads=0)


def test_nothing_to_attack(net, samples, tpgd):
    only_target = samples.where(samples.labels == 1)
    with pytest.raises(EmptyEvaluationSetError):
        batch_attack(net, only_target, tpgd)


def test_summary_of_outcomes():
    cfg = AttackConfig.untargeted(steps=2)
    result = summarize(
        cfg,
        [
            _outcome(0, 0, 1, [False, True, True]),
            _outcome(1, 1, 1, [False, False, False]),
        ],
    )
    assert result.success_rate == 0.5
    np.testing.assert_allclose(result.step_curve, [0.0, 0.5, 0.5])
    assert np.isnan(result.mean_alignment)
    assert result.outcomes[0].first_success_step == 1
    assert result.outcomes[1].first_success_step is None


def test_step_curve_counts_first_success():
    cfg = AttackConfig.untargeted(steps=2)
    result = summarize(
        cfg,
        [
            _outcome(0, 0, 1, [False, True, False]),
            _outcome(1, 1, 1, [False, False, False]),
        ],
    )
    np.testing.assert_allclose(result.step_curve, [0.0, 0.5, 0.5])
    assert np.all(np.diff(result.step_curve) >= 0)
    assert result.success_rate == 0.0
    assert result.outcomes[0].first_success_step == 1


def test_label_distribution():
    outcomes = [
        _outcome(0, 0, 2, [True]),
        _outcome(1, 1, 2, [True]),
        _outcome(2, 2, 2, [False]),
        _outcome(3, 0, 0, [False]),
    ]
    np.testing.assert_array_equal(label_distribution(outcomes, 4), [1, 0, 3, 0])
    np.testing.assert_array_equal(
        label_distribution(outcomes, 4, misclassified_only=True), [0, 0, 2, 0]
    )


def test_beta_sweep_shares_random_starts(net, samples, direction, tpgd):
    results = beta_sweep(net, samples, tpgd, direction, threads=2)
    assert list(results) == ["tpgd"] + [f"fga@{b:g}" for b in DEFAULT_BETAS]
    np.testing.assert_array_equal(
        results["tpgd"].adversarial_images, results["fga@0"].adversarial_images
    )
    assert results["fga@10"].config.beta == 10.0


def test_stamped_set_keeps_true_labels(net, samples, tpgd):
    result = batch_attack(net, samples, tpgd)
    stamped = stamp_adversarial_set(result)
    eligible = samples.where(samples.labels != 1)
    np.testing.assert_array_equal(stamped.labels, eligible.labels)
    np.testing.assert_array_equal(stamped.ids, eligible.ids)
    assert len(stamped) == len(eligible)


class TestAdversarialSet:
    def test_lengths_must_agree(self):
        with pytest.raises(InvalidConfigError, match="same length"):
            AdversarialSet(np.zeros((2, 1, 2, 2)), np.zeros(1), np.arange(2))

    def test_empty(self):
        with pytest.raises(EmptyEvaluationSetError):
            AdversarialSet(np.zeros((0, 1, 2, 2)), np.zeros(0), np.zeros(0))

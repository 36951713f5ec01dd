"""Dirty-label poisoning and poison plans."""

import numpy as np
import pytest

from latentdoor.data import (
    TriggerSpec,
    apply_trigger,
    load_plan,
    poison_count,
    poison_dataset,
    save_plan,
)
from latentdoor.errors import FormatError, InvalidConfigError


@pytest.mark.parametrize(
    "rate,size,expected",
    [(0.1, 40, 4), (0.05, 50, 3), (0.1, 25, 3), (0.01, 40, 0)],
)
def test_poison_count_rounds_halves_up(rate, size, expected):
    assert poison_count(rate, size) == expected


def test_poisoned_samples_are_triggered_and_relabelled(small_set):
    spec = TriggerSpec.badnets(3, target_label=2)
    poisoned, plan = poison_dataset(small_set, spec, 0.1, seed=5)
    chosen = np.array(plan.poisoned_ids)
    assert len(chosen) == 4
    assert np.all(poisoned.labels[chosen] == 2)
    np.testing.assert_array_equal(
        poisoned.images[chosen], apply_trigger(small_set.images[chosen], spec)
    )


def test_other_samples_are_bitwise_unchanged(small_set):
    poisoned, plan = poison_dataset(small_set, TriggerSpec.blend(0.2), 0.1, seed=5)
    untouched = np.setdiff1d(np.arange(len(small_set)), plan.poisoned_ids)
    np.testing.assert_array_equal(poisoned.images[untouched], small_set.images[untouched])
    np.testing.assert_array_equal(poisoned.labels[untouched], small_set.labels[untouched])


def test_same_seed_same_plan(small_set):
    spec = TriggerSpec.wanet()
    _, first = poison_dataset(small_set, spec, 0.2, seed=13)
    _, second = poison_dataset(small_set, spec, 0.2, seed=13)
    _, other = poison_dataset(small_set, spec, 0.2, seed=14)
    assert first.poisoned_ids == second.poisoned_ids
    assert first.poisoned_ids != other.poisoned_ids


def test_plan_records_provenance(small_set):
    _, plan = poison_dataset(small_set, TriggerSpec.badnets(target_label=1), 0.1, seed=3)
    assert plan.trigger == "badnets"
    assert plan.target_label == 1
    assert plan.rng_seed == 3
    assert plan.train_size == 40
    assert list(plan.poisoned_ids) == sorted(plan.poisoned_ids)


def test_plan_yaml_reload(small_set, tmp_path):
    _, plan = poison_dataset(small_set, TriggerSpec.badnets(), 0.1, seed=3)
    path = tmp_path / "plan.yaml"
    save_plan(plan, path)
    assert path.read_text(encoding="utf-8").startswith("format: latentdoor/poison-plan")
    assert load_plan(path) == plan


def test_plan_rejects_other_documents():
    with pytest.raises(FormatError, match="poison plan"):
        load_plan({"format": "something-else"})


def test_plan_count_must_match_rate():
    with pytest.raises(FormatError, match="poisons"):
        load_plan(
            {
                "format": "latentdoor/poison-plan",
                "rate": 0.1,
                "target_label": 0,
                "rng_seed": 0,
                "train_size": 40,
                "poisoned_ids": [1, 2],
            }
        )


@pytest.mark.parametrize("rate", [0.0, 1.0, -0.1])
def test_rate_outside_open_interval(small_set, rate):
    with pytest.raises(InvalidConfigError, match="rate"):
        poison_dataset(small_set, TriggerSpec.badnets(), rate, seed=0)


def test_target_must_be_a_class(small_set):
    with pytest.raises(InvalidConfigError, match="target_label"):
        poison_dataset(small_set, TriggerSpec.badnets(target_label=4), 0.1, seed=0)

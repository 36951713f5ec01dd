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

"""Dirty-label poisoning and the plan that records it."""

import logging
import math
from dataclasses import dataclass
from typing import Any, Union

import numpy as np
import yaml

from latentdoor.data.dataset import Dataset
from latentdoor.data.triggers import TriggerSpec, apply_trigger
from latentdoor.errors import FormatError, InvalidConfigError
from latentdoor.fileio import PathLike, atomic_write_text, read_text

logger = logging.getLogger(__name__)

#: Format identifier written into every poison plan document.
PLAN_FORMAT = "latentdoor/poison-plan"
PLAN_VERSION = "1"


def poison_count(rate: float, size: int) -> int:
    """``round(rate * size)`` with halves rounded up."""
    return int(math.floor(rate * size + 0.5))


@dataclass(frozen=True)
class PoisonPlan:
    """Which training samples were poisoned, and how they were chosen."""

    rate: float
    target_label: int
    rng_seed: int
    train_size: int
    poisoned_ids: tuple[int, ...]
    trigger: str = ""

    def __post_init__(self):
        if not 0.0 < self.rate < 1.0:
            raise InvalidConfigError(f"rate must lie in (0, 1), got {self.rate!r}")
        expected = poison_count(self.rate, self.train_size)
        if len(self.poisoned_ids) != expected:
            raise InvalidConfigError(
                f"A rate of {self.rate} over {self.train_size} samples poisons "
                f"{expected} samples, the plan lists {len(self.poisoned_ids)}"
            )
        if len(set(self.poisoned_ids)) != len(self.poisoned_ids):
            raise InvalidConfigError("poisoned_ids contains duplicates")

    def to_dict(self) -> dict[str, Any]:
        return {
            "format": PLAN_FORMAT,
            "version": PLAN_VERSION,
            "trigger": self.trigger,
            "rate": self.rate,
            "target_label": self.target_label,
            "rng_seed": self.rng_seed,
            "train_size": self.train_size,
            "poisoned_ids": list(self.poisoned_ids),
        }

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False, allow_unicode=True, width=88)

    @classmethod
    def from_dict(cls, document: dict[str, Any]) -> "PoisonPlan":
        if not isinstance(document, dict) or document.get("format") != PLAN_FORMAT:
            raise FormatError(
                f"Not a latentdoor poison plan: expected format={PLAN_FORMAT!r}"
            )
        try:
            return cls(
                rate=float(document["rate"]),
                target_label=int(document["target_label"]),
                rng_seed=int(document["rng_seed"]),
                train_size=int(document["train_size"]),
                poisoned_ids=tuple(int(i) for i in document["poisoned_ids"]),
                trigger=str(document.get("trigger", "")),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"Malformed poison plan: {exc}") from exc


def save_plan(plan: PoisonPlan, path: PathLike) -> None:
    """Writes the plan as YAML."""
    atomic_write_text(path, plan.to_yaml())


def load_plan(source: Union[PathLike, dict[str, Any]]) -> PoisonPlan:
    """Loads a plan from a YAML file or an already parsed mapping."""
    if isinstance(source, dict):
        return PoisonPlan.from_dict(source)
    return PoisonPlan.from_dict(yaml.safe_load(read_text(source, "poison plan")))


def poison_dataset(
    train: Dataset, spec: TriggerSpec, rate: float, seed: int
) -> tuple[Dataset, PoisonPlan]:
    """Stamps the trigger onto a random subset and relabels it to ``y_t``.

    Exactly ``round(rate * N)`` samples are drawn uniformly without
    replacement; all other samples are left bitwise unchanged.

    Raises:
        InvalidConfigError: If ``rate`` is outside (0, 1) or the target
            label is not a class of ``train``.
    """
    if not 0.0 < rate < 1.0:
        raise InvalidConfigError(f"Poison rate must lie in (0, 1), got {rate!r}")
    if spec.target_label >= train.num_classes:
        raise InvalidConfigError(
            f"target_label={spec.target_label} is not a class of a "
            f"{train.num_classes}-class dataset"
        )
    spec.validate_for(train.sample_shape)
    size = len(train)
    count = poison_count(rate, size)
    chosen = np.sort(np.random.default_rng(seed).choice(size, size=count, replace=False))

    images = np.array(train.images)
    labels = np.array(train.labels)
    if count:
        images[chosen] = apply_trigger(images[chosen], spec)
        labels[chosen] = spec.target_label
    plan = PoisonPlan(
        rate=rate,
        target_label=spec.target_label,
        rng_seed=seed,
        train_size=size,
        poisoned_ids=tuple(int(i) for i in train.ids[chosen]),  # type: ignore[index]
        trigger=spec.name,
    )
    logger.info(
        "Poisoned %d/%d samples with %s -> label %d", count, size, spec.name, spec.target_label
    )
    return train.with_images(images, labels), plan

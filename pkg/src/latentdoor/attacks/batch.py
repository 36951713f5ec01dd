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

"""Attacking whole datasets.

Samples are split into fixed chunks of ``chunk_size`` in dataset order and
the chunks are attacked on a thread pool. Chunk boundaries never depend on
``threads``, and every sample's random start is keyed by its id, so the
outcomes are identical whatever the thread count.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from tqdm.auto import tqdm

from latentdoor.attacks.config import AttackConfig, AttackKind, AttackOutcome
from latentdoor.attacks.pgd import check_direction_lineage, run_attack_batch
from latentdoor.data.dataset import Dataset
from latentdoor.errors import EmptyEvaluationSetError, InvalidConfigError
from latentdoor.models.network import Network
from latentdoor.probe.direction import BackdoorDirection
from latentdoor.training.trainer import check_shape

logger = logging.getLogger(__name__)

DEFAULT_BETAS = (0.0, 0.1, 1.0, 10.0)


@dataclass(frozen=True, eq=False)
class BatchAttackResult:
    """Outcomes of one attack configuration over a dataset.

    ``step_curve[k]`` is the fraction of samples that succeeded at some iterate
    ``j <= k``, so it never decreases. ``success_rate`` counts the final iterate
    only and is at most ``step_curve[-1]``.
    """

    config: AttackConfig
    outcomes: list[AttackOutcome]
    success_rate: float
    mean_alignment: float
    step_curve: np.ndarray

    def __len__(self) -> int:
        return len(self.outcomes)

    @property
    def sample_ids(self) -> np.ndarray:
        return np.array([o.sample_id for o in self.outcomes], dtype=np.int64)

    @property
    def adversarial_images(self) -> np.ndarray:
        return np.stack([o.x_adv for o in self.outcomes])


def attackable(ds: Dataset, cfg: AttackConfig) -> Dataset:
    """Samples a configuration may attack: targeted attacks skip the target class.

    Raises:
        EmptyEvaluationSetError: If nothing is left.
    """
    if cfg.kind.is_targeted:
        return ds.where(ds.labels != cfg.target_label)
    if len(ds) == 0:
        raise EmptyEvaluationSetError("No samples to attack")
    return ds


def summarize(cfg: AttackConfig, outcomes: list[AttackOutcome]) -> BatchAttackResult:
    """Aggregates per-sample outcomes into rates, mean alignment and the step curve."""
    if not outcomes:
        raise EmptyEvaluationSetError("No outcomes to summarize")
    success = np.array([o.success for o in outcomes], dtype=bool)
    alignments = np.array([o.alignment for o in outcomes], dtype=np.float64)
    traces = np.stack([o.success_trace for o in outcomes])
    curve = np.maximum.accumulate(traces, axis=1).mean(axis=0)
    mean_alignment = (
        float(np.mean(alignments)) if not np.all(np.isnan(alignments)) else math.nan
    )
    return BatchAttackResult(cfg, outcomes, float(success.mean()), mean_alignment, curve)


def batch_attack(  # pylint: disable=R0913
    net: Network,
    ds: Dataset,
    cfg: AttackConfig,
    direction: Optional[BackdoorDirection] = None,
    threads: int = 1,
    chunk_size: int = 64,
    progress: bool = False,
) -> BatchAttackResult:
    """Runs ``cfg`` on every eligible sample of ``ds``.

    Args:
        net: Network under attack.
        ds: Samples to attack; for targeted attacks and FGA samples of the
            target class are skipped.
        cfg: Attack settings.
        direction: Backdoor direction; required for FGA, optional
            otherwise (then only used to report alignment).
        threads: Worker threads.
        chunk_size: Samples per work unit.
        progress: Show a tqdm bar over chunks.

    Raises:
        EmptyEvaluationSetError: If no sample is eligible.
        LineageMismatchError: If ``direction`` belongs to another network.
    """
    if threads < 1 or chunk_size < 1:
        raise InvalidConfigError("threads and chunk_size must be >= 1")
    if cfg.kind is AttackKind.FGA and direction is None:
        raise InvalidConfigError("The feature-guided attack needs a backdoor direction")
    check_shape(net, ds)
    if direction is not None:
        check_direction_lineage(net, direction)
    eligible = attackable(ds, cfg)
    ids = eligible.ids
    starts = list(range(0, len(eligible), chunk_size))

    def work(start: int) -> list[AttackOutcome]:
        stop = start + chunk_size
        return run_attack_batch(
            net,
            eligible.images[start:stop],
            eligible.labels[start:stop],
            ids[start:stop],  # type: ignore[index]
            cfg,
            direction,
        )

    with ThreadPoolExecutor(max_workers=threads) as pool:
        chunks = list(
            tqdm(
                pool.map(work, starts),
                total=len(starts),
                desc=cfg.kind.short_name,
                disable=not progress,
                leave=False,
            )
        )
    result = summarize(cfg, [o for chunk in chunks for o in chunk])
    logger.info(
        "%s eps=%.4f steps=%d beta=%g: success %.4f over %d samples",
        cfg.kind.short_name, cfg.epsilon, cfg.steps, cfg.beta,
        result.success_rate, len(result),
    )
    return result


def label_distribution(
    outcomes: Sequence[AttackOutcome], num_classes: int, misclassified_only: bool = False
) -> np.ndarray:
    """Histogram of adversarial predictions over ``num_classes`` labels.

    With ``misclassified_only`` only outcomes whose prediction left the true
    label are counted.
    """
    predictions = np.array(
        [
            o.prediction
            for o in outcomes
            if not misclassified_only or o.prediction != o.true_label
        ],
        dtype=np.int64,
    )
    return np.bincount(predictions, minlength=num_classes)


def beta_sweep(  # pylint: disable=R0913
    net: Network,
    ds: Dataset,
    base: AttackConfig,
    direction: BackdoorDirection,
    betas: Sequence[float] = DEFAULT_BETAS,
    threads: int = 1,
    chunk_size: int = 64,
) -> dict[str, BatchAttackResult]:
    """Targeted PGD plus one FGA run per ``β``, all from the same random starts.

    Returns:
        dict: ``"tpgd"`` and ``"fga@<beta>"`` keys in sweep order.
    """
    results = {
        "tpgd": batch_attack(
            net, ds, base.evolve(kind=AttackKind.TARGETED_PGD), direction, threads, chunk_size
        )
    }
    for beta in betas:
        cfg = base.evolve(kind=AttackKind.FGA, beta=float(beta))
        results[f"fga@{beta:g}"] = batch_attack(net, ds, cfg, direction, threads, chunk_size)
    return results


@dataclass(frozen=True, eq=False)
class AdversarialSet:
    """Adversarial images with the TRUE labels of the samples they came from."""

    images: np.ndarray
    labels: np.ndarray
    ids: np.ndarray

    def __post_init__(self):
        if not len(self.images) == len(self.labels) == len(self.ids):
            raise InvalidConfigError("images, labels and ids must have the same length")
        if len(self.images) == 0:
            raise EmptyEvaluationSetError("An adversarial set needs at least one image")

    def __len__(self) -> int:
        return len(self.ids)


def stamp_adversarial_set(result: BatchAttackResult) -> AdversarialSet:
    """Turns attack outcomes into an unlearning source."""
    return AdversarialSet(
        images=result.adversarial_images,
        labels=np.array([o.true_label for o in result.outcomes], dtype=np.int64),
        ids=result.sample_ids,
    )

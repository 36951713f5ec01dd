"""Before/after measurements of one repair."""

import logging
import math
import warnings
from dataclasses import asdict, dataclass
from typing import Any, Optional

from latentdoor.attacks.batch import BatchAttackResult, batch_attack
from latentdoor.attacks.config import AttackConfig, AttackKind
from latentdoor.data.dataset import Dataset
from latentdoor.data.triggers import TriggerSpec
from latentdoor.errors import (
    DegenerateDirectionError,
    LineageMismatchError,
    TooFewCleanSamplesError,
)
from latentdoor.models.network import Network
from latentdoor.models.serialization import network_fingerprint
from latentdoor.probe.direction import BackdoorDirection, estimate_direction
from latentdoor.training.trainer import attack_success_rate, evaluate_accuracy

logger = logging.getLogger(__name__)

@dataclass(frozen=True)
class ReportRow:  # pylint: disable=R0902
    """One (defense, backdoor attack, poison rate, ε) line of the repair table.

    ``fga_*`` and ``align_*`` are NaN when no direction could be estimated.
    """

    defense: str
    attack: str
    poison_rate: float
    epsilon: float
    acc_before: float
    acc_after: float
    asr_orig_before: float
    asr_orig_after: float
    fga_before: float
    fga_after: float
    align_before: float
    align_after: float

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def _check_lineage(
    before: Network, after: Network, ds: Dataset, direction: BackdoorDirection
) -> None:
    if before.architecture_signature() != after.architecture_signature():
        raise LineageMismatchError(
            "The repaired network does not share the architecture of the original"
        )
    if ds.sample_shape != before.input_shape:
        raise LineageMismatchError(
            f"{ds.split.value} samples of shape {ds.sample_shape!r} do not belong to a "
            f"network taking {before.input_shape!r}"
        )
    if direction.network_fingerprint != network_fingerprint(before):
        raise LineageMismatchError("The direction was not estimated on the original network")


def _fga(
    net: Network,
    ds: Dataset,
    direction: Optional[BackdoorDirection],
    cfg: AttackConfig,
    threads: int,
) -> tuple[float, float]:
    if direction is None:
        return math.nan, math.nan
    result = batch_attack(net, ds, cfg, direction, threads=threads)
    return result.success_rate, result.mean_alignment


def reestimate(
    net: Network, probe_set: Dataset, spec: TriggerSpec
) -> Optional[BackdoorDirection]:
    """Fresh direction on a repaired network, or None with a warning."""
    try:
        return estimate_direction(net, probe_set, spec)
    except (DegenerateDirectionError, TooFewCleanSamplesError) as exc:
        warnings.warn(
            f"No backdoor direction on the repaired network ({exc}); "
            "FGA columns are reported as NaN",
            UserWarning,
            stacklevel=3,
        )
        return None


def repair_report(  # pylint: disable=R0913,R0914
    before: Network,
    after: Network,
    ds: Dataset,
    spec: TriggerSpec,
    dir_before: BackdoorDirection,
    cfg: AttackConfig,
    defense: str,
    poison_rate: float,
    probe_set: Optional[Dataset] = None,
    threads: int = 1,
    before_result: Optional[BatchAttackResult] = None,
    test_set: Optional[Dataset] = None,
) -> ReportRow:
    """Measures clean accuracy, original-trigger ASR and FGA before and after a repair.

    The FGA on ``after`` always uses a direction whose provenance is
    ``after``: ``dir_before`` is reused only when both networks are
    bitwise identical, otherwise the direction is re-estimated on
    ``probe_set`` (default ``ds``). ``before_result`` may carry an FGA run
    of ``cfg`` on ``before`` already computed for another row of the grid.
    Clean accuracy and original-trigger ASR are measured on ``test_set``
    (default ``ds``); the FGA columns always attack ``ds``.

    Raises:
        LineageMismatchError: If the networks, dataset or direction do not
            come from the same experiment.
    """
    _check_lineage(before, after, ds, dir_before)
    evaluated = ds
    if test_set is not None:
        _check_lineage(before, after, test_set, dir_before)
        evaluated = test_set
    cfg = cfg.evolve(kind=AttackKind.FGA, target_label=spec.target_label)
    if before_result is not None:
        fga_before, align_before = before_result.success_rate, before_result.mean_alignment
    else:
        fga_before, align_before = _fga(before, ds, dir_before, cfg, threads)
    if network_fingerprint(after) == network_fingerprint(before):
        fga_after, align_after = fga_before, align_before
    else:
        dir_after = reestimate(after, probe_set if probe_set is not None else ds, spec)
        fga_after, align_after = _fga(after, ds, dir_after, cfg, threads)

    row = ReportRow(
        defense=defense,
        attack=spec.name,
        poison_rate=float(poison_rate),
        epsilon=float(cfg.epsilon),
        acc_before=evaluate_accuracy(before, evaluated),
        acc_after=evaluate_accuracy(after, evaluated),
        asr_orig_before=attack_success_rate(before, evaluated, spec),
        asr_orig_after=attack_success_rate(after, evaluated, spec),
        fga_before=fga_before,
        fga_after=fga_after,
        align_before=align_before,
        align_after=align_after,
    )
    logger.info(
        "%s/%s rate=%g eps=%.4f: asr %.3f -> %.3f, fga %.3f -> %.3f",
        defense, spec.name, poison_rate, cfg.epsilon,
        row.asr_orig_before, row.asr_orig_after, row.fga_before, row.fga_after,
    )
    return row

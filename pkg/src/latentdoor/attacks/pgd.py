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

"""Projected sign-gradient ascent: PGD, targeted PGD and the feature-guided attack.

All three attacks share one loop::

    x⁽⁰⁾   = Π(x + ξ),            ξ ~ U[-η, η]ⁿ
    x⁽ᵏ⁺¹⁾ = Π(x⁽ᵏ⁾ + α sign(∇ₓJ(x⁽ᵏ⁾)))

where ``Π`` projects onto the ℓ∞ ball of radius ``ε`` around ``x`` and
clips to [0, 1] after every step. Only the objective ``J`` differs:

* untargeted PGD ascends ``CE(f(x), y_true)``;
* targeted PGD ascends ``-CE(f(x), y_t)``;
* FGA ascends ``-CE(f(x), y_t) + β ⟨φ(x), d⟩``.

The random start of each sample is drawn from
``default_rng((seed, sample_id))``, so a sample's iterates do not depend
on which batch or thread attacks it. The logits computed for the gradient
at step ``k`` double as the success check for iterate ``k``.
"""

from typing import Optional, Sequence

import numpy as np

from latentdoor.attacks.config import AttackConfig, AttackKind, AttackOutcome
from latentdoor.errors import (
    DegenerateDirectionError,
    InvalidConfigError,
    LineageMismatchError,
)
from latentdoor.models.network import Network, trace_forward
from latentdoor.models.objectives import ObjectiveSpec, objective_gradient
from latentdoor.models.serialization import network_fingerprint
from latentdoor.numerics.tensor import linf_distance, linf_project
from latentdoor.probe.direction import BackdoorDirection, cosine_to_direction


def check_direction_lineage(net: Network, direction: BackdoorDirection) -> None:
    """Refuses a direction estimated on another network or another feature tap.

    Raises:
        LineageMismatchError: If the provenance fingerprint or the layer
            tag does not match ``net``.
        DegenerateDirectionError: If the direction has no length.
    """
    if direction.layer_tag != net.layer_tag:
        raise LineageMismatchError(
            f"Direction lives at {direction.layer_tag!r}, the network taps {net.layer_tag!r}"
        )
    if direction.network_fingerprint != network_fingerprint(net):
        raise LineageMismatchError(
            "Direction was estimated on a different network; re-estimate it on "
            "this one before attacking"
        )
    if np.linalg.norm(direction.vector) < 1e-9:
        raise DegenerateDirectionError("Direction vector has zero length")


def _objective(
    cfg: AttackConfig, true_labels: np.ndarray, direction: Optional[BackdoorDirection]
) -> ObjectiveSpec:
    if cfg.kind is AttackKind.UNTARGETED_PGD:
        return ObjectiveSpec.ce_toward(true_labels)
    if cfg.kind is AttackKind.TARGETED_PGD:
        return ObjectiveSpec.negative_ce_toward(cfg.target_label)
    if direction is None:
        raise InvalidConfigError("The feature-guided attack needs a backdoor direction")
    return ObjectiveSpec.guided(cfg.target_label, direction.vector, cfg.beta)


def _succeeded(cfg: AttackConfig, predictions: np.ndarray, true_labels: np.ndarray) -> np.ndarray:
    if cfg.kind is AttackKind.UNTARGETED_PGD:
        return predictions != true_labels
    return predictions == cfg.target_label


def random_start(
    x: np.ndarray, sample_ids: Sequence[int], cfg: AttackConfig
) -> np.ndarray:
    """``Π(x + ξ)`` with per-sample noise seeded by ``(cfg.seed, sample_id)``."""
    if cfg.eta == 0:
        return linf_project(x.copy(), x, cfg.epsilon)
    noise = np.stack(
        [
            np.random.default_rng((cfg.seed, int(sid))).uniform(
                -cfg.eta, cfg.eta, size=x.shape[1:]
            )
            for sid in sample_ids
        ]
    )
    return linf_project((x + noise).astype(x.dtype), x, cfg.epsilon)


def run_attack_batch(  # pylint: disable=R0913,R0914
    net: Network,
    x: np.ndarray,
    true_labels: np.ndarray,
    sample_ids: Sequence[int],
    cfg: AttackConfig,
    direction: Optional[BackdoorDirection] = None,
) -> list[AttackOutcome]:
    """Attacks a batch ``(N, C, H, W)`` and returns one outcome per sample.

    Raises:
        ShapeMismatchError: If ``x`` does not fit the network.
        LineageMismatchError: If an FGA direction belongs to another network.
        InvalidConfigError: If FGA is requested without a direction.
    """
    if direction is not None:
        check_direction_lineage(net, direction)
    if cfg.kind.is_targeted and cfg.target_label >= net.num_classes:
        raise InvalidConfigError(
            f"target_label={cfg.target_label} is not a class of a "
            f"{net.num_classes}-class network"
        )
    origin, _ = net.input_batch(x)
    true_labels = np.asarray(true_labels, dtype=np.int64)
    objective = _objective(cfg, true_labels, direction)

    adv = random_start(origin, sample_ids, cfg)
    trace_rows = []
    for _ in range(cfg.steps):
        trace = trace_forward(net, adv)
        trace_rows.append(_succeeded(cfg, np.argmax(trace.logits, axis=1), true_labels))
        grad = objective_gradient(net, trace, objective)
        adv = linf_project(adv + cfg.step_alpha * np.sign(grad), origin, cfg.epsilon)

    final_logits = net.forward(adv)
    predictions = np.argmax(final_logits, axis=1)
    final_success = _succeeded(cfg, predictions, true_labels)
    trace_rows.append(final_success)
    success_trace = np.stack(trace_rows, axis=1)

    if direction is not None:
        shift = net.features_at(adv).astype(np.float64) - net.features_at(origin).astype(
            np.float64
        )
        alignments = cosine_to_direction(shift, direction.vector)
    else:
        alignments = np.full(len(adv), np.nan)

    return [
        AttackOutcome(
            sample_id=int(sample_ids[i]),
            true_label=int(true_labels[i]),
            x_adv=adv[i],
            prediction=int(predictions[i]),
            success=bool(final_success[i]),
            linf_norm=linf_distance(adv[i], origin[i]),
            alignment=float(alignments[i]),
            steps_run=cfg.steps,
            success_trace=success_trace[i],
        )
        for i in range(len(adv))
    ]


def _single(  # pylint: disable=R0913
    net: Network,
    x: np.ndarray,
    true_label: int,
    cfg: AttackConfig,
    expected: AttackKind,
    sample_id: int,
    direction: Optional[BackdoorDirection] = None,
) -> AttackOutcome:
    if cfg.kind is not expected:
        raise InvalidConfigError(f"Expected a {expected.value} config, got {cfg.kind.value}")
    batch, _ = net.input_batch(x)
    if len(batch) != 1:
        raise InvalidConfigError("Single-sample attacks take one image; use batch_attack")
    return run_attack_batch(net, batch, [true_label], [sample_id], cfg, direction)[0]


def pgd_untargeted(
    net: Network, x: np.ndarray, y_true: int, cfg: AttackConfig, sample_id: int = 0
) -> AttackOutcome:
    """Untargeted PGD: succeeds when the prediction leaves ``y_true``."""
    return _single(net, x, y_true, cfg, AttackKind.UNTARGETED_PGD, sample_id)


def pgd_targeted(  # pylint: disable=R0913
    net: Network,
    x: np.ndarray,
    target_label: int,
    cfg: AttackConfig,
    sample_id: int = 0,
    true_label: Optional[int] = None,
) -> AttackOutcome:
    """Targeted PGD toward ``target_label``: succeeds when the prediction equals it."""
    cfg = cfg.evolve(target_label=target_label)
    label = target_label if true_label is None else true_label
    return _single(net, x, label, cfg, AttackKind.TARGETED_PGD, sample_id)


def fga(  # pylint: disable=R0913
    net: Network,
    x: np.ndarray,
    target_label: int,
    direction: BackdoorDirection,
    cfg: AttackConfig,
    sample_id: int = 0,
    true_label: Optional[int] = None,
) -> AttackOutcome:
    """Feature-guided attack toward ``target_label`` along ``direction``.

    With ``cfg.beta == 0`` this is bitwise identical to :func:`pgd_targeted`
    under the same seed.

    Raises:
        LineageMismatchError: If ``direction`` was not estimated on ``net``.
    """
    cfg = cfg.evolve(target_label=target_label)
    label = target_label if true_label is None else true_label
    return _single(net, x, label, cfg, AttackKind.FGA, sample_id, direction)

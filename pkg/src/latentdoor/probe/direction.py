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

"""The backdoor direction in feature space.

Given a trigger, take the validation samples the network classifies
correctly, extract their features with and without the trigger and
normalise the difference of the two means::

    d = (μ_trig - μ_clean) / ‖μ_trig - μ_clean‖₂

The per-sample displacement ``s = ‖φ(π(x)) - φ(x)‖₂`` is recorded for every
sample used, keyed by sample id, together with the fingerprint of the
network the features came from. That fingerprint is the direction's
provenance: a direction may only guide attacks on the exact network it was
estimated on, so a repaired model always needs a fresh estimate.

Two readouts interpret ``d`` without re-running an attack:

* :func:`alignment`: cosine between an observed feature shift and ``d``;
* :func:`head_projection`: ``v = W d`` through the final linear layer,
  whose dominant component names the class the direction pushes toward.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Mapping, Union

import numpy as np
import yaml

from latentdoor.data.dataset import Dataset
from latentdoor.data.triggers import TriggerSpec, apply_trigger
from latentdoor.errors import (
    DegenerateDirectionError,
    FormatError,
    InvalidConfigError,
    ShapeMismatchError,
    TooFewCleanSamplesError,
)
from latentdoor.fileio import PathLike, atomic_write_text, read_text
from latentdoor.models.network import Network
from latentdoor.models.serialization import network_fingerprint
from latentdoor.training.trainer import check_shape

logger = logging.getLogger(__name__)

#: Format identifier written into every direction document.
DIRECTION_FORMAT = "latentdoor/direction"
DIRECTION_VERSION = "1"

#: Feature shifts (and mean gaps) shorter than this count as zero.
ZERO_SHIFT = 1e-9


@dataclass(frozen=True, eq=False)
class BackdoorDirection:  # pylint: disable=R0902
    """Unit direction ``d`` at a feature tap, with its provenance.

    Attributes:
        vector: Unit-norm feature direction (float64).
        layer_tag: ``Network.layer_tag`` of the tap it lives at.
        n_samples: Number of clean samples that defined it.
        mean_displacement: Mean of the per-sample displacements ``s``.
        per_sample_displacement: ``s`` keyed by sample id.
        target_label: Target label of the trigger.
        trigger_name: Trigger family it was estimated for.
        network_fingerprint: SHA-256 of the network it was estimated on.
        source_split: Split the sample ids refer to.
    """

    vector: np.ndarray
    layer_tag: str
    n_samples: int
    mean_displacement: float
    per_sample_displacement: Mapping[int, float] = field(default_factory=dict)
    target_label: int = 0
    trigger_name: str = ""
    network_fingerprint: str = ""
    source_split: str = "val"

    def __post_init__(self):
        vector = np.asarray(self.vector, dtype=np.float64)
        if vector.ndim != 1:
            raise ShapeMismatchError(f"direction must be a vector, got {vector.shape!r}")
        if abs(np.linalg.norm(vector) - 1.0) > 1e-6:
            raise InvalidConfigError(
                f"direction must have unit norm, got {np.linalg.norm(vector)!r}"
            )
        if self.n_samples < 2:
            raise TooFewCleanSamplesError(
                f"A direction needs at least 2 samples, got {self.n_samples}"
            )
        if any(s < 0 for s in self.per_sample_displacement.values()) or self.mean_displacement < 0:
            raise InvalidConfigError("displacements must be >= 0")
        vector.setflags(write=False)
        object.__setattr__(self, "vector", vector)
        object.__setattr__(self, "per_sample_displacement", dict(self.per_sample_displacement))

    def to_dict(self) -> dict[str, Any]:
        return {
            "format": DIRECTION_FORMAT,
            "version": DIRECTION_VERSION,
            "layer_tag": self.layer_tag,
            "trigger": self.trigger_name,
            "target_label": self.target_label,
            "network_fingerprint": self.network_fingerprint,
            "source_split": self.source_split,
            "n_samples": self.n_samples,
            "mean_displacement": float(self.mean_displacement),
            "vector": [float(v) for v in self.vector],
            "per_sample_displacement": {
                int(k): float(v) for k, v in sorted(self.per_sample_displacement.items())
            },
        }

    @classmethod
    def from_dict(cls, document: dict[str, Any]) -> "BackdoorDirection":
        if not isinstance(document, dict) or document.get("format") != DIRECTION_FORMAT:
            raise FormatError(
                f"Not a latentdoor direction document: expected format={DIRECTION_FORMAT!r}"
            )
        try:
            return cls(
                vector=np.asarray(document["vector"], dtype=np.float64),
                layer_tag=str(document["layer_tag"]),
                n_samples=int(document["n_samples"]),
                mean_displacement=float(document["mean_displacement"]),
                per_sample_displacement={
                    int(k): float(v)
                    for k, v in (document.get("per_sample_displacement") or {}).items()
                },
                target_label=int(document.get("target_label", 0)),
                trigger_name=str(document.get("trigger", "")),
                network_fingerprint=str(document.get("network_fingerprint", "")),
                source_split=str(document.get("source_split", "val")),
            )
        except (KeyError, TypeError) as exc:
            raise FormatError(f"Malformed direction document: {exc}") from exc


def save_direction(direction: BackdoorDirection, path: PathLike) -> None:
    atomic_write_text(
        path,
        yaml.safe_dump(direction.to_dict(), sort_keys=False, allow_unicode=True, width=88),
    )


def load_direction(source: Union[PathLike, dict[str, Any]]) -> BackdoorDirection:
    """Loads a direction from a YAML file or an already parsed mapping."""
    if isinstance(source, dict):
        return BackdoorDirection.from_dict(source)
    return BackdoorDirection.from_dict(yaml.safe_load(read_text(source, "direction file")))


def direction_from_features(
    clean: np.ndarray, triggered: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Normalised mean feature shift and per-sample displacement norms.

    Args:
        clean: ``(n, d)`` clean features.
        triggered: ``(n, d)`` features of the same samples with the trigger.

    Returns:
        tuple: Unit direction ``(d,)`` and displacements ``(n,)``.

    Raises:
        TooFewCleanSamplesError: If ``n < 2``.
        DegenerateDirectionError: If the two means coincide.
    """
    clean = np.asarray(clean, dtype=np.float64)
    triggered = np.asarray(triggered, dtype=np.float64)
    if clean.shape != triggered.shape or clean.ndim != 2:
        raise ShapeMismatchError(
            f"Feature arrays must both be (n, d), got {clean.shape!r} and {triggered.shape!r}"
        )
    if clean.shape[0] < 2:
        raise TooFewCleanSamplesError(
            f"Need at least 2 correctly classified samples, got {clean.shape[0]}"
        )
    gap = triggered.mean(axis=0) - clean.mean(axis=0)
    norm = np.linalg.norm(gap)
    if norm < ZERO_SHIFT:
        raise DegenerateDirectionError(
            f"Clean and triggered feature means coincide (gap {norm:.3g})"
        )
    displacements = np.linalg.norm(triggered - clean, axis=1)
    return gap / norm, displacements


def estimate_direction(net: Network, ds: Dataset, spec: TriggerSpec) -> BackdoorDirection:
    """Estimates ``d`` from the non-target samples of ``ds`` that ``net`` classifies correctly.

    Raises:
        TooFewCleanSamplesError: If fewer than two samples are correct.
        DegenerateDirectionError: If the trigger does not move the feature mean.
    """
    check_shape(net, ds)
    correct = (net.predict(ds.images) == ds.labels) & (ds.labels != spec.target_label)
    if correct.sum() < 2:
        raise TooFewCleanSamplesError(
            f"Only {int(correct.sum())} non-target samples are classified correctly"
        )
    clean = ds.images[correct]
    vector, displacements = direction_from_features(
        net.features_at(clean), net.features_at(apply_trigger(clean, spec))
    )
    ids = ds.ids[correct]  # type: ignore[index]
    direction = BackdoorDirection(
        vector=vector,
        layer_tag=net.layer_tag,
        n_samples=int(correct.sum()),
        mean_displacement=float(displacements.mean()),
        per_sample_displacement={int(i): float(s) for i, s in zip(ids, displacements)},
        target_label=spec.target_label,
        trigger_name=spec.name,
        network_fingerprint=network_fingerprint(net),
        source_split=ds.split.value,
    )
    logger.info(
        "Estimated %s direction at %s from %d samples (mean displacement %.4f)",
        spec.name, net.layer_tag, direction.n_samples, direction.mean_displacement,
    )
    return direction


def cosine_to_direction(shift: np.ndarray, vector: np.ndarray) -> np.ndarray:
    """Row-wise cosine of feature shifts with ``vector``; zero-length shifts give 0."""
    shift = np.atleast_2d(np.asarray(shift, dtype=np.float64))
    norms = np.linalg.norm(shift, axis=1)
    safe = np.where(norms < ZERO_SHIFT, 1.0, norms)
    cosine = np.where(norms < ZERO_SHIFT, 0.0, (shift @ vector) / safe)
    return np.clip(cosine, -1.0, 1.0)


def alignment(
    net: Network, x_clean: np.ndarray, x_adv: np.ndarray, direction: BackdoorDirection
) -> Union[float, np.ndarray]:
    """Cosine between ``φ(x_adv) - φ(x_clean)`` and ``d``.

    Returns a float for single samples and an array for batches.
    """
    if direction.vector.shape != (net.feature_dim,):
        raise ShapeMismatchError(
            f"Direction has length {direction.vector.size}, features have {net.feature_dim}"
        )
    clean = np.asarray(net.features_at(x_clean), dtype=np.float64)
    adv = np.asarray(net.features_at(x_adv), dtype=np.float64)
    if clean.shape != adv.shape:
        raise ShapeMismatchError(f"Inputs differ in shape: {clean.shape!r} vs {adv.shape!r}")
    cosine = cosine_to_direction(adv - clean, direction.vector)
    return float(cosine[0]) if clean.ndim == 1 else cosine


def head_projection(net: Network, direction: BackdoorDirection) -> tuple[np.ndarray, int]:
    """``v = W d`` through the final linear layer and its arg-max class.

    Raises:
        NoLinearHeadError: If the network does not end in a linear layer.
        ShapeMismatchError: If that layer does not read the tapped features.
    """
    weight = np.asarray(net.head_weight_matrix(), dtype=np.float64)
    if weight.shape[1] != direction.vector.size:
        raise ShapeMismatchError(
            f"Head weight {weight.shape!r} does not act on {direction.vector.size}-d features"
        )
    projected = weight @ direction.vector
    return projected, int(np.argmax(projected))


@dataclass(frozen=True, eq=False)
class ProjectionDiagnostics:
    """Per-sample cosine of the true trigger shift with ``d``.

    No bound is asserted on these values; they are exported as raw
    diagnostics of how consistently the trigger moves features along ``d``.
    """

    sample_ids: np.ndarray
    projections: np.ndarray

    @property
    def positive_fraction(self) -> float:
        return float(np.mean(self.projections > 0))


def projection_diagnostics(
    net: Network, ds: Dataset, spec: TriggerSpec, direction: BackdoorDirection
) -> ProjectionDiagnostics:
    """``⟨d_x, d⟩ / ‖d_x‖`` with ``d_x = φ(π(x)) - φ(x)`` for every sample of ``ds``."""
    check_shape(net, ds)
    projections = alignment(net, ds.images, apply_trigger(ds.images, spec), direction)
    return ProjectionDiagnostics(np.array(ds.ids), np.atleast_1d(projections))

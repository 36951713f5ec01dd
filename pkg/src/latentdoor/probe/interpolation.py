"""Feature-space interpolation along the backdoor direction.

For a correctly classified clean sample with features ``φ(x)`` and
displacement ``s``, the probe evaluates the head on ``φ(x) + α s d`` over a
grid of ``α`` and records the softmax probability of the target label. At
``α = 1`` the injected feature has moved as far along ``d`` as the real
trigger moved that sample; at ``α = 0`` the head sees the clean features
unchanged, so the logits are bitwise those of ``forward(x)``.
"""

from dataclasses import dataclass

import numpy as np

from latentdoor.data.dataset import Dataset
from latentdoor.errors import InvalidConfigError
from latentdoor.models.network import Network
from latentdoor.numerics.losses import softmax
from latentdoor.probe.direction import BackdoorDirection
from latentdoor.training.trainer import check_shape

#: ``0, 0.05, ..., 1.5``.
DEFAULT_ALPHAS = np.round(np.linspace(0.0, 1.5, 31), 10)


@dataclass(frozen=True, eq=False)
class InterpolationCurve:
    """Target probabilities ``(n_samples, n_alphas)`` along the direction."""

    alphas: np.ndarray
    probabilities: np.ndarray
    sample_ids: np.ndarray
    target_label: int

    def __post_init__(self):
        if np.any(np.diff(self.alphas) <= 0):
            raise InvalidConfigError("alphas must be strictly increasing")
        if self.probabilities.shape != (len(self.sample_ids), len(self.alphas)):
            raise InvalidConfigError(
                f"probabilities {self.probabilities.shape!r} do not match "
                f"{len(self.sample_ids)} samples x {len(self.alphas)} alphas"
            )
        if np.any(self.probabilities < 0) or np.any(self.probabilities > 1):
            raise InvalidConfigError("probabilities must lie in [0, 1]")

    @property
    def mean_prob(self) -> np.ndarray:
        return self.probabilities.mean(axis=0)

    @property
    def std_prob(self) -> np.ndarray:
        return self.probabilities.std(axis=0)

    @property
    def n(self) -> int:
        return len(self.sample_ids)

    def mean_at(self, alpha: float) -> float:
        """Mean target probability at the grid point closest to ``alpha``."""
        return float(self.mean_prob[int(np.argmin(np.abs(self.alphas - alpha)))])


def interpolation_candidates(net: Network, ds: Dataset, target_label: int) -> Dataset:
    """Samples of ``ds`` that are classified correctly and are not of the target class.

    Raises:
        EmptyEvaluationSetError: If no sample qualifies.
    """
    check_shape(net, ds)
    keep = (net.predict(ds.images) == ds.labels) & (ds.labels != target_label)
    return ds.where(keep)


def interpolation_probe(
    net: Network,
    samples: Dataset,
    direction: BackdoorDirection,
    alphas: np.ndarray = DEFAULT_ALPHAS,
) -> InterpolationCurve:
    """Target probability of ``g(φ(x) + α s d)`` for every sample and ``α``.

    ``s`` is the sample's own displacement when ``samples`` come from the
    split the direction was estimated on and the id was used; otherwise the
    direction's mean displacement.

    Raises:
        InvalidConfigError: If a sample already has the target label or
            ``alphas`` is not strictly increasing.
    """
    check_shape(net, samples)
    alphas = np.asarray(alphas, dtype=np.float64)
    target = direction.target_label
    if np.any(samples.labels == target):
        raise InvalidConfigError("Interpolation samples must not belong to the target class")

    same_split = samples.split.value == direction.source_split
    lookup = direction.per_sample_displacement if same_split else {}
    ids = samples.ids if samples.ids is not None else np.arange(len(samples))
    scale = np.array(
        [lookup.get(int(i), direction.mean_displacement) for i in ids],
        dtype=np.float64,
    )
    features = net.features_at(samples.images)
    probabilities = np.empty((len(samples), len(alphas)), dtype=np.float64)
    for column, alpha in enumerate(alphas):
        shift = (alpha * scale[:, None] * direction.vector[None, :]).astype(net.dtype)
        logits = net.head_forward(features + shift)
        probabilities[:, column] = softmax(logits.astype(np.float64))[:, target]
    return InterpolationCurve(alphas, probabilities, np.array(ids), target)

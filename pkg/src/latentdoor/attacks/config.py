"""Attack configuration and per-sample outcomes."""

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional

import numpy as np

from latentdoor.errors import InvalidConfigError


class AttackKind(Enum):
    """Which ascent the attack runs."""

    UNTARGETED_PGD = "untargeted_pgd"
    TARGETED_PGD = "targeted_pgd"
    FGA = "fga"

    @property
    def short_name(self) -> str:
        """Name used in file names and report columns."""
        return {"untargeted_pgd": "pgd", "targeted_pgd": "tpgd", "fga": "fga"}[self.value]

    @property
    def is_targeted(self) -> bool:
        return self is not AttackKind.UNTARGETED_PGD


@dataclass(frozen=True)
class AttackConfig:  # pylint: disable=R0902
    """ℓ∞ projected sign-gradient attack settings.

    ``init_eta`` is the half-width of the uniform random start; ``None``
    means "same as ``epsilon``" and ``0`` disables the random start.
    """

    kind: AttackKind
    epsilon: float = 8 / 255
    step_alpha: float = 2 / 255
    steps: int = 20
    beta: float = 1.0
    init_eta: Optional[float] = None
    seed: int = 0
    target_label: int = 0

    def __post_init__(self):
        if not (math.isfinite(self.epsilon) and self.epsilon >= 0):
            raise InvalidConfigError(f"epsilon must be finite and >= 0, got {self.epsilon!r}")
        if self.steps < 0:
            raise InvalidConfigError(f"steps must be >= 0, got {self.steps!r}")
        if self.steps > 0 and not self.step_alpha > 0:
            raise InvalidConfigError(f"step_alpha must be > 0, got {self.step_alpha!r}")
        if not self.beta >= 0:
            raise InvalidConfigError(f"beta must be >= 0, got {self.beta!r}")
        if self.init_eta is not None and not self.init_eta >= 0:
            raise InvalidConfigError(f"init_eta must be >= 0, got {self.init_eta!r}")
        if self.target_label < 0:
            raise InvalidConfigError(f"target_label must be >= 0, got {self.target_label!r}")

    @property
    def eta(self) -> float:
        """Effective random-start half-width."""
        return self.epsilon if self.init_eta is None else self.init_eta

    @classmethod
    def untargeted(cls, epsilon: float = 8 / 255, steps: int = 20, **kwargs) -> "AttackConfig":
        return cls(AttackKind.UNTARGETED_PGD, epsilon=epsilon, steps=steps, **kwargs)

    @classmethod
    def targeted(cls, epsilon: float = 8 / 255, steps: int = 20, **kwargs) -> "AttackConfig":
        return cls(AttackKind.TARGETED_PGD, epsilon=epsilon, steps=steps, **kwargs)

    @classmethod
    def feature_guided(
        cls, epsilon: float = 32 / 255, steps: int = 200, beta: float = 1.0, **kwargs
    ) -> "AttackConfig":
        return cls(AttackKind.FGA, epsilon=epsilon, steps=steps, beta=beta, **kwargs)

    def evolve(self, **changes) -> "AttackConfig":
        """Copy with ``changes`` applied and re-validated."""
        return replace(self, **changes)


@dataclass(frozen=True, eq=False)
class AttackOutcome:  # pylint: disable=R0902
    """Result of attacking one sample.

    ``success_trace[k]`` tells whether iterate ``k`` (0 is the random start,
    ``steps`` the final one) met the success criterion; ``success`` is the
    verdict on the final iterate. ``alignment`` is NaN when no direction
    was supplied.
    """

    sample_id: int
    true_label: int
    x_adv: np.ndarray
    prediction: int
    success: bool
    linf_norm: float
    alignment: float
    steps_run: int
    success_trace: np.ndarray

    @property
    def first_success_step(self) -> Optional[int]:
        """Earliest iterate that succeeded, or None."""
        hits = np.flatnonzero(self.success_trace)
        return int(hits[0]) if hits.size else None

"""Training hyperparameters and per-epoch history."""

import math
from dataclasses import dataclass, field

from latentdoor.errors import InvalidConfigError


@dataclass(frozen=True)
class TrainConfig:
    """SGD settings for implanting and fitting models.

    ``lr = 0`` is accepted and yields a frozen run; negative ``weight_decay``
    is accepted as well and grows the weights instead of shrinking them.
    """

    epochs: int = 20
    batch_size: int = 32
    lr: float = 0.01
    momentum: float = 0.9
    weight_decay: float = 5e-4
    lr_milestones: tuple[int, ...] = (10, 15)
    lr_gamma: float = 0.1
    early_stop_patience: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1:
            raise InvalidConfigError(f"epochs must be >= 1, got {self.epochs!r}")
        if self.batch_size < 1:
            raise InvalidConfigError(f"batch_size must be >= 1, got {self.batch_size!r}")
        if not (math.isfinite(self.lr) and self.lr >= 0):
            raise InvalidConfigError(f"lr must be finite and >= 0, got {self.lr!r}")
        if not 0.0 <= self.momentum < 1.0:
            raise InvalidConfigError(f"momentum must lie in [0, 1), got {self.momentum!r}")
        if not math.isfinite(self.weight_decay):
            raise InvalidConfigError(f"weight_decay must be finite, got {self.weight_decay!r}")
        if not self.lr_gamma > 0:
            raise InvalidConfigError(f"lr_gamma must be > 0, got {self.lr_gamma!r}")
        if self.early_stop_patience < 1:
            raise InvalidConfigError(
                f"early_stop_patience must be >= 1, got {self.early_stop_patience!r}"
            )
        milestones = tuple(int(m) for m in self.lr_milestones)
        if list(milestones) != sorted(set(milestones)) or any(m < 1 for m in milestones):
            raise InvalidConfigError(
                f"lr_milestones must be increasing positive epochs, got {self.lr_milestones!r}"
            )
        object.__setattr__(self, "lr_milestones", milestones)

    def learning_rate_at(self, epoch: int) -> float:
        """Step schedule ``lr * gamma^k``, ``k`` = milestones reached (epochs count from 0)."""
        reached = sum(1 for milestone in self.lr_milestones if epoch >= milestone)
        return self.lr * self.lr_gamma**reached


@dataclass
class TrainHistory:
    """Per-epoch metrics of one training or fine-tuning run.

    ``val_acc`` and ``val_asr`` are NaN when no validation set or monitor
    trigger was supplied.
    """

    epoch: list[int] = field(default_factory=list)
    train_loss: list[float] = field(default_factory=list)
    val_acc: list[float] = field(default_factory=list)
    val_asr: list[float] = field(default_factory=list)
    learning_rate: list[float] = field(default_factory=list)
    best_epoch: int = -1

    def record(  # pylint: disable=R0913
        self, epoch: int, train_loss: float, val_acc: float, val_asr: float, lr: float
    ) -> None:
        self.epoch.append(epoch)
        self.train_loss.append(float(train_loss))
        self.val_acc.append(float(val_acc))
        self.val_asr.append(float(val_asr))
        self.learning_rate.append(float(lr))

    def __len__(self) -> int:
        return len(self.epoch)

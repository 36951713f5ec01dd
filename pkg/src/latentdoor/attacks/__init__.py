"""ℓ∞ attacks: untargeted PGD, targeted PGD and the feature-guided attack."""

from latentdoor.attacks.batch import (
    DEFAULT_BETAS,
    AdversarialSet,
    BatchAttackResult,
    attackable,
    batch_attack,
    beta_sweep,
    label_distribution,
    stamp_adversarial_set,
    summarize,
)
from latentdoor.attacks.config import AttackConfig, AttackKind, AttackOutcome
from latentdoor.attacks.pgd import (
    check_direction_lineage,
    fga,
    pgd_targeted,
    pgd_untargeted,
    random_start,
    run_attack_batch,
)

__all__ = [
    "DEFAULT_BETAS",
    "AdversarialSet",
    "AttackConfig",
    "AttackKind",
    "AttackOutcome",
    "BatchAttackResult",
    "attackable",
    "batch_attack",
    "beta_sweep",
    "check_direction_lineage",
    "fga",
    "label_distribution",
    "pgd_targeted",
    "pgd_untargeted",
    "random_start",
    "run_attack_batch",
    "stamp_adversarial_set",
    "summarize",
]

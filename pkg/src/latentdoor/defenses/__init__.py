"""Post-training repairs and their before/after report."""

from latentdoor.defenses.distillation import (
    DistillConfig,
    attention_map,
    attention_map_backward,
    default_attention_layers,
    distill_repair,
    distillation_gradients,
    distillation_loss,
)
from latentdoor.defenses.report import ReportRow, reestimate, repair_report
from latentdoor.defenses.unlearning import UnlearnConfig, mixed_epoch, unlearn_trigger

__all__ = [
    "DistillConfig",
    "ReportRow",
    "UnlearnConfig",
    "attention_map",
    "attention_map_backward",
    "default_attention_layers",
    "distill_repair",
    "distillation_gradients",
    "distillation_loss",
    "mixed_epoch",
    "reestimate",
    "repair_report",
    "unlearn_trigger",
]

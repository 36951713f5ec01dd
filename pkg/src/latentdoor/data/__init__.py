"""Datasets, trigger transformations and dirty-label poisoning."""

from latentdoor.data.dataset import Dataset, LabeledImage, Split
from latentdoor.data.idx import import_idx_dataset, load_idx, parse_idx
from latentdoor.data.poisoning import (
    PoisonPlan,
    load_plan,
    poison_count,
    poison_dataset,
    save_plan,
)
from latentdoor.data.storage import (
    DATASET_MAGIC,
    DATASET_VERSION,
    dumps_dataset,
    load_dataset,
    loads_dataset,
    save_dataset,
)
from latentdoor.data.synthetic import synth_dataset, synth_splits
from latentdoor.data.triggers import (
    BadNetsParams,
    BlendParams,
    Corner,
    TriggerKind,
    TriggerSpec,
    WaNetParams,
    apply_trigger,
    warp_field,
)

__all__ = [
    "BadNetsParams",
    "BlendParams",
    "Corner",
    "DATASET_MAGIC",
    "DATASET_VERSION",
    "Dataset",
    "LabeledImage",
    "PoisonPlan",
    "Split",
    "TriggerKind",
    "TriggerSpec",
    "WaNetParams",
    "apply_trigger",
    "dumps_dataset",
    "import_idx_dataset",
    "load_dataset",
    "load_idx",
    "load_plan",
    "loads_dataset",
    "parse_idx",
    "poison_count",
    "poison_dataset",
    "save_dataset",
    "save_plan",
    "synth_dataset",
    "synth_splits",
    "warp_field",
]

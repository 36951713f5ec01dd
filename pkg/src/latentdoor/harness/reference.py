"""Published full-scale numbers shipped for side-by-side reading.

These come from ResNet-18 runs on CIFAR-10 and are documentation only:
nothing in the lab asserts against them, and desk-scale runs are not
expected to reproduce them.
"""

import pandas as pd

REFERENCE_COLUMNS = ["experiment", "dataset", "model", "attack", "setting", "value"]

_ROWS = [
    ("tpgd_asr_pct", "cifar10", "resnet18", "badnets", "eps=8/255", 98.18),
    ("tpgd_asr_pct", "cifar10", "resnet18", "blend", "eps=8/255", 96.99),
    ("tpgd_asr_pct", "cifar10", "resnet18", "wanet", "eps=8/255", 99.07),
    ("tpgd_asr_pct", "cifar10", "resnet18", "badnets", "eps=16/255", 99.73),
    ("tpgd_asr_pct", "cifar10", "resnet18", "blend", "eps=16/255", 99.09),
    ("tpgd_asr_pct", "cifar10", "resnet18", "wanet", "eps=16/255", 99.96),
    ("tpgd_asr_pct", "cifar10", "resnet18", "badnets", "eps=32/255", 99.89),
    ("tpgd_asr_pct", "cifar10", "resnet18", "blend", "eps=32/255", 99.67),
    ("tpgd_asr_pct", "cifar10", "resnet18", "wanet", "eps=32/255", 100.0),
    ("distill_asr_after_pct", "cifar10", "resnet18", "badnets", "lambda=0.5", 8.92),
    ("distill_asr_after_pct", "cifar10", "resnet18", "wanet", "lambda=0.5", 10.37),
    ("distill_asr_after_pct", "cifar10", "resnet18", "blend", "lambda=0.5", 7.86),
    ("distill_fga_pct", "cifar10", "resnet18", "badnets", "eps=32/255", 63.38),
    ("distill_fga_pct", "cifar10", "resnet18", "wanet", "eps=32/255", 68.06),
    ("distill_fga_pct", "cifar10", "resnet18", "blend", "eps=32/255", 79.11),
    ("ssim_original_trigger", "cifar10", "resnet18", "badnets", "clean_vs_triggered", 0.942),
    ("ssim_original_trigger", "cifar10", "resnet18", "wanet", "clean_vs_triggered", 0.943),
    ("ssim_original_trigger", "cifar10", "resnet18", "blend", "clean_vs_triggered", 0.495),
    ("ssim_alternative_trigger", "cifar10", "resnet18", "badnets", "eps=8/255", 0.252),
    ("ssim_alternative_trigger", "cifar10", "resnet18", "badnets", "eps=32/255", 0.219),
]


def full_scale_reference() -> pd.DataFrame:
    """The reference fixtures as a frame with :data:`REFERENCE_COLUMNS`."""
    return pd.DataFrame(_ROWS, columns=REFERENCE_COLUMNS)

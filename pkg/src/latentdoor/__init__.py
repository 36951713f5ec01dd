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

"""
latentdoor: a desk-scale lab for backdoor directions in feature space, the
feature-guided attack built on them, and audits of backdoor repairs.
"""

from latentdoor.__version__ import __version__
from latentdoor.attacks import (
    AttackConfig,
    AttackKind,
    AttackOutcome,
    BatchAttackResult,
    batch_attack,
    fga,
    pgd_targeted,
    pgd_untargeted,
)
from latentdoor.data import Dataset, Split, TriggerSpec, apply_trigger, poison_dataset
from latentdoor.defenses import (
    DistillConfig,
    ReportRow,
    UnlearnConfig,
    distill_repair,
    repair_report,
    unlearn_trigger,
)
from latentdoor.harness import ExperimentConfig, ExperimentRun, load_experiment_config
from latentdoor.models import Network, build_preset, load_network, save_network
from latentdoor.numerics import Precision
from latentdoor.probe import (
    BackdoorDirection,
    estimate_direction,
    head_projection,
    interpolation_probe,
)
from latentdoor.training import TrainConfig, train

__all__ = [
    "__version__",
    "AttackConfig",
    "AttackKind",
    "AttackOutcome",
    "BackdoorDirection",
    "BatchAttackResult",
    "Dataset",
    "DistillConfig",
    "ExperimentConfig",
    "ExperimentRun",
    "Network",
    "Precision",
    "ReportRow",
    "Split",
    "TrainConfig",
    "TriggerSpec",
    "UnlearnConfig",
    "apply_trigger",
    "batch_attack",
    "build_preset",
    "distill_repair",
    "estimate_direction",
    "fga",
    "head_projection",
    "interpolation_probe",
    "load_experiment_config",
    "load_network",
    "poison_dataset",
    "repair_report",
    "save_network",
    "train",
    "unlearn_trigger",
]

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
Experiment harness: config, run manifest, SSIM, figure bundles, the phase
pipeline and the ``latentdoor`` command line.
"""

from latentdoor.harness.config import (
    ExperimentConfig,
    apply_overrides,
    config_hash,
    derive_seed,
    load_experiment_config,
    parse_experiment_config,
    parse_number,
)
from latentdoor.harness.figures import emit_figures
from latentdoor.harness.manifest import RunManifest, load_manifest, save_manifest
from latentdoor.harness.metrics import SSIM_WINDOW, mean_ssim, ssim
from latentdoor.harness.pipeline import PHASES, BackdoorVariant, ExperimentRun
from latentdoor.harness.reference import full_scale_reference

__all__ = [
    "PHASES",
    "SSIM_WINDOW",
    "BackdoorVariant",
    "ExperimentConfig",
    "ExperimentRun",
    "RunManifest",
    "apply_overrides",
    "config_hash",
    "derive_seed",
    "emit_figures",
    "full_scale_reference",
    "load_experiment_config",
    "load_manifest",
    "mean_ssim",
    "parse_experiment_config",
    "parse_number",
    "save_manifest",
    "ssim",
]

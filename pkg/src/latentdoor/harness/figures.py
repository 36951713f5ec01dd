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

"""Plot-ready CSV bundles gathered from a run directory.

Nothing is rendered. Each bundle concatenates the per-model CSVs the
pipeline phases wrote, in file-name order, so the bytes depend only on the
artifacts.

=========================  ====================================================
Bundle                     Columns
=========================  ====================================================
label_histogram.csv        model, label, count, misclassified_count
interpolation.csv          model, alpha, mean_prob, std_prob, n
step_curves.csv            model, run, step, success_rate
beta_sweep.csv             model, run, beta, success_rate, mean_alignment, n
backdoor_table.csv         model, trigger, poison_rate, clean_acc, asr, ...
tpgd_table.csv             model, trigger, poison_rate, kind, epsilon, ...
perceptual_table.csv       model, trigger, poison_rate, comparison, epsilon, ssim
repair_table.csv           defense, attack, poison_rate, epsilon, ...
full_scale_reference.csv   experiment, dataset, model, attack, setting, value
=========================  ====================================================
"""

import logging
from pathlib import Path

import pandas as pd

from latentdoor.errors import MissingArtifactError
from latentdoor.exporters.csv_exporter import (
    INTERPOLATION_COLUMNS,
    REPORT_COLUMNS,
    read_csv,
    write_csv,
)
from latentdoor.fileio import PathLike
from latentdoor.harness.reference import full_scale_reference

logger = logging.getLogger(__name__)

FIGURES_DIR = "figures"

#: bundle name -> (glob under the run directory, required columns)
_CONCATENATED = {
    "label_histogram.csv": ("attacks/label_histogram_*.csv", ["model", "label", "count"]),
    "interpolation.csv": ("probe/interpolation_*.csv", ["model", *INTERPOLATION_COLUMNS]),
    "step_curves.csv": ("attacks/step_curve_*.csv", ["model", "run", "step", "success_rate"]),
    "beta_sweep.csv": ("attacks/beta_sweep_*.csv", ["model", "run", "beta", "mean_alignment"]),
    "backdoor_table.csv": ("reports/backdoor.csv", ["model", "clean_acc", "asr"]),
    "tpgd_table.csv": ("attacks/summary.csv", ["model", "kind", "epsilon", "success_rate"]),
    "perceptual_table.csv": ("attacks/perceptual.csv", ["model", "comparison", "ssim"]),
    "repair_table.csv": ("reports/repair.csv", REPORT_COLUMNS),
}


def _gather(run_dir: Path, pattern: str, columns: list[str]) -> pd.DataFrame:
    paths = sorted(run_dir.glob(pattern))
    if not paths:
        raise MissingArtifactError(f"Missing artifact for figures: {str(run_dir / pattern)!r}")
    return pd.concat([read_csv(p, columns) for p in paths], ignore_index=True)


def emit_figures(run_dir: PathLike) -> dict[str, Path]:
    """Writes every bundle under ``<run_dir>/figures`` and returns their paths.

    Raises:
        MissingArtifactError: If an input artifact is absent.
    """
    root = Path(run_dir)
    written: dict[str, Path] = {}
    frames = {
        name: _gather(root, pattern, columns)
        for name, (pattern, columns) in _CONCATENATED.items()
    }
    frames["tpgd_table.csv"] = frames["tpgd_table.csv"][
        frames["tpgd_table.csv"]["kind"].isin(["tpgd", "fga"])
    ]
    frames["full_scale_reference.csv"] = full_scale_reference()
    for name, frame in frames.items():
        path = root / FIGURES_DIR / name
        write_csv(frame, path)
        written[name] = path
    logger.info("Wrote %d figure bundles to %s", len(written), root / FIGURES_DIR)
    return written

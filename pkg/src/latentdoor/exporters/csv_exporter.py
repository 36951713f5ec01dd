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

"""CSV exporters for histories, probes, attacks and repair reports.

Each ``to_*_frame`` function builds a :class:`pandas.DataFrame` with a fixed
column order; :func:`write_csv` serialises any of them byte-for-byte
reproducibly (no index, ``\\n`` line endings, ``%.10g`` floats).
"""

from io import StringIO
from typing import Iterable, Mapping, Sequence

import numpy as np
import pandas as pd

from latentdoor.attacks.batch import BatchAttackResult
from latentdoor.defenses.report import ReportRow
from latentdoor.errors import FormatError
from latentdoor.fileio import PathLike, atomic_write_text, read_text
from latentdoor.probe.direction import ProjectionDiagnostics
from latentdoor.probe.interpolation import InterpolationCurve
from latentdoor.training.config import TrainHistory

HISTORY_COLUMNS = ["epoch", "train_loss", "val_acc", "val_asr", "lr"]
INTERPOLATION_COLUMNS = ["alpha", "mean_prob", "std_prob", "n"]
BATCH_COLUMNS = ["sample_id", "success", "linf", "alignment", "steps_to_success"]
REPORT_COLUMNS = [
    "defense",
    "attack",
    "poison_rate",
    "epsilon",
    "acc_before",
    "acc_after",
    "asr_orig_before",
    "asr_orig_after",
    "fga_before",
    "fga_after",
    "align_before",
    "align_after",
]


def to_history_frame(history: TrainHistory) -> pd.DataFrame:
    """One row per epoch."""
    return pd.DataFrame(
        {
            "epoch": history.epoch,
            "train_loss": history.train_loss,
            "val_acc": history.val_acc,
            "val_asr": history.val_asr,
            "lr": history.learning_rate,
        },
        columns=HISTORY_COLUMNS,
    )


def to_interpolation_frame(curve: InterpolationCurve) -> pd.DataFrame:
    """Mean and spread of the target probability per ``α``."""
    return pd.DataFrame(
        {
            "alpha": curve.alphas,
            "mean_prob": curve.mean_prob,
            "std_prob": curve.std_prob,
            "n": np.full(len(curve.alphas), curve.n, dtype=np.int64),
        },
        columns=INTERPOLATION_COLUMNS,
    )


def to_batch_frame(result: BatchAttackResult) -> pd.DataFrame:
    """Per-sample attack outcomes; ``steps_to_success`` is empty for failures."""
    return pd.DataFrame(
        {
            "sample_id": [o.sample_id for o in result.outcomes],
            "success": [int(o.success) for o in result.outcomes],
            "linf": [o.linf_norm for o in result.outcomes],
            "alignment": [o.alignment for o in result.outcomes],
            "steps_to_success": pd.array(
                [o.first_success_step for o in result.outcomes], dtype="Int64"
            ),
        },
        columns=BATCH_COLUMNS,
    )


def to_report_frame(rows: Iterable[ReportRow]) -> pd.DataFrame:
    return pd.DataFrame([row.to_dict() for row in rows], columns=REPORT_COLUMNS)


def to_label_histogram_frame(counts: np.ndarray) -> pd.DataFrame:
    return pd.DataFrame({"label": np.arange(len(counts)), "count": np.asarray(counts)})


def to_step_curve_frame(results: Mapping[str, BatchAttackResult]) -> pd.DataFrame:
    """Long-form per-step success curves, one block per named run."""
    frames = [
        pd.DataFrame(
            {
                "run": name,
                "step": np.arange(len(result.step_curve)),
                "success_rate": result.step_curve,
            }
        )
        for name, result in results.items()
    ]
    if not frames:
        return pd.DataFrame(columns=["run", "step", "success_rate"])
    return pd.concat(frames, ignore_index=True)


def to_beta_sweep_frame(sweep: Mapping[str, BatchAttackResult]) -> pd.DataFrame:
    """Success and alignment per run of a β sweep; the T-PGD row has an empty β."""
    return pd.DataFrame(
        {
            "run": list(sweep),
            "beta": [
                np.nan if r.config.kind.short_name == "tpgd" else r.config.beta
                for r in sweep.values()
            ],
            "success_rate": [r.success_rate for r in sweep.values()],
            "mean_alignment": [r.mean_alignment for r in sweep.values()],
            "n": [len(r) for r in sweep.values()],
        }
    )


def to_projection_frame(diagnostics: ProjectionDiagnostics) -> pd.DataFrame:
    return pd.DataFrame(
        {"sample_id": diagnostics.sample_ids, "projection": diagnostics.projections}
    )


def to_csv(frame: pd.DataFrame) -> str:
    """Serialises ``frame`` with the fixed CSV dialect."""
    return frame.to_csv(index=False, lineterminator="\n", float_format="%.10g")


def write_csv(frame: pd.DataFrame, path: PathLike) -> None:
    """Atomically writes ``frame`` to ``path``."""
    atomic_write_text(path, to_csv(frame))


def read_csv(path: PathLike, columns: Sequence[str] = ()) -> pd.DataFrame:
    """Reads a bundle back, checking that ``columns`` are present.

    Raises:
        MissingArtifactError: If ``path`` does not exist.
        FormatError: If a required column is missing.
    """
    frame = pd.read_csv(StringIO(read_text(path, "CSV bundle")))
    missing = [c for c in columns if c not in frame.columns]
    if missing:
        raise FormatError(f"{path!s} lacks columns {missing!r}")
    return frame

"""Tabular artifacts and the CSV dialect they are written in."""

import numpy as np
import pandas as pd
import pytest

from latentdoor.attacks import AttackConfig, AttackKind, AttackOutcome, summarize
from latentdoor.defenses import ReportRow
from latentdoor.errors import FormatError, MissingArtifactError
from latentdoor.exporters import (
    BATCH_COLUMNS,
    HISTORY_COLUMNS,
    REPORT_COLUMNS,
    read_csv,
    to_batch_frame,
    to_beta_sweep_frame,
    to_csv,
    to_history_frame,
    to_interpolation_frame,
    to_label_histogram_frame,
    to_report_frame,
    to_step_curve_frame,
    write_csv,
)
from latentdoor.probe import InterpolationCurve
from latentdoor.training import TrainHistory


def _outcome(sample_id, trace):
    return AttackOutcome(
        sample_id=sample_id,
        true_label=0,
        x_adv=np.zeros((1, 2, 2)),
        prediction=1 if trace[-1] else 0,
        success=bool(trace[-1]),
        linf_norm=0.25,
        alignment=0.5,
        steps_run=len(trace) - 1,
        success_trace=np.array(trace, dtype=bool),
    )


@pytest.fixture(name="result")
def result_fixture():
    cfg = AttackConfig.targeted(steps=2, target_label=1)
    return summarize(cfg, [_outcome(4, [False, True, True]), _outcome(9, [False, False, False])])


def test_dialect():
    text = to_csv(pd.DataFrame({"a": [1.0 / 3.0], "b": ["x"]}))
    assert text == "a,b\n0.3333333333,x\n"


def test_history_frame():
    history = TrainHistory()
    history.record(0, 1.5, 0.5, float("nan"), 0.01)
    history.record(1, 1.0, 0.75, float("nan"), 0.001)
    frame = to_history_frame(history)
    assert list(frame.columns) == HISTORY_COLUMNS
    assert frame["lr"].tolist() == [0.01, 0.001]
    assert to_csv(frame).splitlines()[1] == "0,1.5,0.5,,0.01"


def test_interpolation_frame():
    curve = InterpolationCurve(
        alphas=np.array([0.0, 0.5]),
        probabilities=np.array([[0.2, 0.4], [0.4, 0.8]]),
        sample_ids=np.array([3, 5]),
        target_label=0,
    )
    frame = to_interpolation_frame(curve)
    np.testing.assert_allclose(frame["mean_prob"], [0.3, 0.6])
    assert frame["n"].tolist() == [2, 2]


def test_batch_frame_leaves_failures_blank(result):
    frame = to_batch_frame(result)
    assert list(frame.columns) == BATCH_COLUMNS
    assert to_csv(frame).splitlines()[1:] == ["4,1,0.25,0.5,1", "9,0,0.25,0.5,"]


def test_step_curves_and_sweep(result):
    steps = to_step_curve_frame({"tpgd": result, "fga@1": result})
    assert steps["run"].tolist() == ["tpgd"] * 3 + ["fga@1"] * 3
    np.testing.assert_allclose(steps["success_rate"][:3], [0.0, 0.5, 0.5])
    assert list(to_step_curve_frame({}).columns) == ["run", "step", "success_rate"]

    guided = summarize(result.config.evolve(kind=AttackKind.FGA, beta=10.0), result.outcomes)
    sweep = to_beta_sweep_frame({"tpgd": result, "fga@10": guided})
    assert np.isnan(sweep["beta"][0])
    assert sweep["beta"][1] == 10.0
    assert sweep["n"].tolist() == [2, 2]


def test_report_and_histogram_frames():
    row = ReportRow("identity", "blend", 0.1, 8 / 255, 0.9, 0.9, 1.0, 1.0,
                    0.5, 0.5, 0.2, 0.2)
    assert list(to_report_frame([row]).columns) == REPORT_COLUMNS
    histogram = to_label_histogram_frame(np.array([2, 0, 5]))
    assert histogram.to_dict("list") == {"label": [0, 1, 2], "count": [2, 0, 5]}


class TestReadBack:
    def test_written_bundle_reads_back(self, tmp_path, result):
        path = tmp_path / "attacks" / "tpgd.csv"
        write_csv(to_batch_frame(result), path)
        frame = read_csv(path, BATCH_COLUMNS)
        assert frame["sample_id"].tolist() == [4, 9]

    def test_missing_columns(self, tmp_path):
        path = tmp_path / "bundle.csv"
        write_csv(pd.DataFrame({"alpha": [0.0]}), path)
        with pytest.raises(FormatError, match="mean_prob"):
            read_csv(path, ["alpha", "mean_prob"])

    def test_missing_file(self, tmp_path):
        with pytest.raises(MissingArtifactError):
            read_csv(tmp_path / "absent.csv")

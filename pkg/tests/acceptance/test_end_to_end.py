"""A tiny experiment through every phase."""

import numpy as np
import pytest

from latentdoor.data import Split, load_dataset, load_plan
from latentdoor.exporters import REPORT_COLUMNS, read_csv
from latentdoor.harness import load_manifest
from latentdoor.harness.cli import main
from latentdoor.models import load_network, network_fingerprint
from latentdoor.probe import load_direction

pytestmark = pytest.mark.slow

TAG = "badnets_r100"


def test_manifest_lists_every_artifact(run_dir):
    manifest = load_manifest(run_dir)
    assert manifest.missing(run_dir) == []
    assert set(manifest.timings) == {"train", "probe", "attack", "defend", "report"}
    for name in ("model:clean", f"model:backdoor_{TAG}", f"direction:{TAG}",
                 "repair_table", "figure:tpgd_table.csv"):
        assert name in manifest.artifacts


def test_poisoned_set_follows_its_plan(run_dir):
    plan = load_plan(run_dir / "data" / f"poisoned_{TAG}.plan.yaml")
    poisoned = load_dataset(run_dir / "data" / f"poisoned_{TAG}.bdld", Split.TRAIN)
    assert len(plan.poisoned_ids) == 6
    assert np.all(poisoned.labels[list(plan.poisoned_ids)] == 0)


def test_direction_belongs_to_the_backdoored_model(run_dir):
    model = load_network(run_dir / "models" / f"backdoor_{TAG}.bdlm")
    direction = load_direction(run_dir / "directions" / f"{TAG}.yaml")
    assert direction.network_fingerprint == network_fingerprint(model)
    assert direction.layer_tag == model.layer_tag


def test_adversarial_examples_respect_the_budget(run_dir):
    for eps, tag in ((8 / 255, "eps8"), (32 / 255, "eps32")):
        for kind in ("tpgd", "fga"):
            frame = read_csv(run_dir / "attacks" / f"{kind}_{TAG}_{tag}.csv", ["linf"])
            assert (frame["linf"] <= eps * (1 + 1e-9)).all()


def test_guided_run_without_feature_term_equals_targeted_run(run_dir):
    sweep = read_csv(run_dir / "attacks" / f"beta_sweep_{TAG}.csv")
    by_run = sweep.set_index("run")
    assert by_run.loc["tpgd", "success_rate"] == by_run.loc["fga@0", "success_rate"]


def test_repair_table(run_dir):
    report = read_csv(run_dir / "reports" / "repair.csv", REPORT_COLUMNS)
    assert len(report) == 4 * 2
    identity = report[report["defense"] == "identity"]
    assert (identity["acc_before"] == identity["acc_after"]).all()
    assert (identity["asr_orig_before"] == identity["asr_orig_after"]).all()
    assert np.allclose(identity["fga_before"], identity["fga_after"], equal_nan=True)
    assert report[["acc_after", "asr_orig_after"]].apply(lambda c: c.between(0, 1)).all().all()


def test_backdoor_table(run_dir):
    table = read_csv(run_dir / "reports" / "backdoor.csv", ["model", "clean_acc", "asr"])
    assert table["model"].tolist() == [TAG]
    assert 0.0 <= table["asr"][0] <= 1.0


def test_repair_and_backdoor_tables_measure_the_same_test_split(run_dir):
    report = read_csv(run_dir / "reports" / "repair.csv", REPORT_COLUMNS)
    table = read_csv(run_dir / "reports" / "backdoor.csv", ["model", "clean_acc", "asr"])
    assert report["acc_before"].to_numpy() == pytest.approx(table["clean_acc"][0])
    assert report["asr_orig_before"].to_numpy() == pytest.approx(table["asr"][0])


def test_rerunning_a_phase_rewrites_identical_bytes(run_dir, config_path):
    paths = sorted((run_dir / "attacks").glob("*.csv"))
    before = {p.name: p.read_bytes() for p in paths}
    assert main(["attack", "--config", str(config_path), "--out", str(run_dir)]) == 0
    assert {p.name: p.read_bytes() for p in paths} == before


def test_same_seed_same_bytes(run_dir, config_path, tmp_path):
    again = tmp_path / "again"
    assert main(["train", "--config", str(config_path), "--out", str(run_dir)]) == 0
    assert main(["train", "--config", str(config_path), "--out", str(again)]) == 0
    for name in ("models/clean.bdlm", f"models/backdoor_{TAG}.bdlm", "data/train.bdld",
                 f"histories/backdoor_{TAG}.csv"):
        assert (again / name).read_bytes() == (run_dir / name).read_bytes()

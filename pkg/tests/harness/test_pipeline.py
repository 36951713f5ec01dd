"""Run-directory plumbing shared by the phases."""

import pytest

from latentdoor.data import Split
from latentdoor.errors import MissingArtifactError
from latentdoor.harness import ExperimentRun, RunManifest, parse_experiment_config, save_manifest
from latentdoor.harness.pipeline import eps_tag, rate_tag


@pytest.fixture(name="run")
def run_fixture(document, tmp_path):
    document["poisoning"] = {"rates": [0.05, 0.1]}
    document["triggers"] = {"families": ["badnets", "wanet"]}
    return ExperimentRun(parse_experiment_config(document), run_dir=tmp_path)


def test_tags():
    assert rate_tag(0.1) == "r100"
    assert rate_tag(0.05) == "r050"
    assert eps_tag(8 / 255) == "eps8"
    assert eps_tag(32 / 255) == "eps32"


def test_variant_grid(run):
    assert [v.tag for v in run.variants()] == [
        "badnets_r050",
        "badnets_r100",
        "wanet_r050",
        "wanet_r100",
    ]
    assert run.variants()[2].spec.name == "wanet"


def test_seeds_follow_the_root_seed(run, document, tmp_path):
    document["experiment"]["seed"] = 4
    other = ExperimentRun(parse_experiment_config(document), run_dir=tmp_path / "other")
    assert run.seed("train", "clean") != other.seed("train", "clean")
    assert run.seed("train", "clean") == run.seed("train", "clean")


def test_phases_require_training_artifacts(run):
    with pytest.raises(MissingArtifactError, match="train phase"):
        run.probe()
    with pytest.raises(MissingArtifactError):
        run.load_split(Split.TEST)


def test_manifest_of_another_config_is_replaced(run, tmp_path):
    save_manifest(RunManifest("stale", artifacts={}), tmp_path)
    reopened = ExperimentRun(run.cfg, run_dir=tmp_path)
    assert reopened.manifest.config_hash == run.config_hash

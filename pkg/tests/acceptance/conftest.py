import pytest
import yaml

from latentdoor.harness.cli import main

TINY = {
    "experiment": {"name": "tiny", "seed": 5},
    "data": {
        "num_classes": 3,
        "shape": [3, 16, 16],
        "train_per_class": 20,
        "val_per_class": 10,
        "test_per_class": 10,
    },
    "training": {"epochs": 8, "batch_size": 16, "lr": 0.05, "lr_milestones": [6]},
    "triggers": {"families": ["badnets"]},
    "poisoning": {"rates": [0.1]},
    "attacks": {
        "epsilons": ["8/255", "32/255"],
        "pgd_steps": 3,
        "fga_steps": 5,
        "betas": [0.0, 1.0],
        "sample_limit": 12,
        "chunk_size": 8,
    },
    "defenses": {
        "unlearn_epochs": 1,
        "distill_epochs": 1,
        "distill_fraction": 0.5,
        "alt_samples": 8,
    },
}


@pytest.fixture(name="config_path", scope="module")
def config_path_fixture(tmp_path_factory):
    path = tmp_path_factory.mktemp("config") / "tiny.yaml"
    path.write_text(yaml.safe_dump(TINY), encoding="utf-8")
    return path


@pytest.fixture(name="run_dir", scope="module")
def run_dir_fixture(config_path, tmp_path_factory):
    """A complete tiny run, shared by the tests of this package."""
    run_dir = tmp_path_factory.mktemp("run")
    assert main(["run", "--config", str(config_path), "--out", str(run_dir)]) == 0
    return run_dir

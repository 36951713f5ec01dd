from pathlib import Path

import pytest


@pytest.fixture(name="desk_config")
def desk_config_fixture():
    return Path(__file__).resolve().parents[2] / "configs" / "desk.yaml"


@pytest.fixture(name="document")
def document_fixture():
    """A small but complete experiment document."""
    return {
        "experiment": {"name": "unit", "seed": 3},
        "data": {"num_classes": 3, "shape": [1, 8, 8], "train_per_class": 10},
        "triggers": {"families": ["badnets"]},
        "poisoning": {"rates": [0.1]},
    }

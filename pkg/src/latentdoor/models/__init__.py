"""The classifier ``f = g ∘ φ``: network, objectives, presets and the model file format."""

from latentdoor.models.network import ForwardTrace, Network, trace_backward, trace_forward
from latentdoor.models.objectives import (
    ObjectiveKind,
    ObjectiveSpec,
    evaluate_objective,
    feature_gradient,
    input_gradient,
    objective_gradient,
    objective_values,
)
from latentdoor.models.presets import PRESETS, MicroNetConfig, build_preset
from latentdoor.models.serialization import (
    MODEL_MAGIC,
    MODEL_VERSION,
    dumps_network,
    load_network,
    loads_network,
    network_fingerprint,
    save_network,
)

__all__ = [
    "ForwardTrace",
    "MODEL_MAGIC",
    "MODEL_VERSION",
    "MicroNetConfig",
    "Network",
    "ObjectiveKind",
    "ObjectiveSpec",
    "PRESETS",
    "build_preset",
    "dumps_network",
    "evaluate_objective",
    "feature_gradient",
    "input_gradient",
    "load_network",
    "loads_network",
    "network_fingerprint",
    "objective_gradient",
    "objective_values",
    "save_network",
    "trace_backward",
    "trace_forward",
]

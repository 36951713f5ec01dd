"""Backdoor direction estimation and the readouts built on it."""

from latentdoor.probe.direction import (
    DIRECTION_FORMAT,
    BackdoorDirection,
    ProjectionDiagnostics,
    alignment,
    cosine_to_direction,
    direction_from_features,
    estimate_direction,
    head_projection,
    load_direction,
    projection_diagnostics,
    save_direction,
)
from latentdoor.probe.interpolation import (
    DEFAULT_ALPHAS,
    InterpolationCurve,
    interpolation_candidates,
    interpolation_probe,
)

__all__ = [
    "DEFAULT_ALPHAS",
    "DIRECTION_FORMAT",
    "BackdoorDirection",
    "InterpolationCurve",
    "ProjectionDiagnostics",
    "alignment",
    "cosine_to_direction",
    "direction_from_features",
    "estimate_direction",
    "head_projection",
    "interpolation_candidates",
    "interpolation_probe",
    "load_direction",
    "projection_diagnostics",
    "save_direction",
]

"""Dense arrays, layers with analytic gradients, losses and gradient checks."""

from latentdoor.numerics.gradcheck import finite_difference_grad, relative_error
from latentdoor.numerics.layers import (
    Conv2d,
    Flatten,
    GlobalAvgPool,
    Layer,
    LayerKind,
    Linear,
    ReLU,
    backward_layer,
    forward_layer,
)
from latentdoor.numerics.losses import (
    batch_softmax_cross_entropy,
    softmax,
    softmax_cross_entropy,
)
from latentdoor.numerics.tensor import (
    Precision,
    as_batch,
    enforce_linf_bound,
    ensure_finite,
    linf_distance,
    linf_project,
)

__all__ = [
    "Conv2d",
    "Flatten",
    "GlobalAvgPool",
    "Layer",
    "LayerKind",
    "Linear",
    "Precision",
    "ReLU",
    "as_batch",
    "backward_layer",
    "batch_softmax_cross_entropy",
    "enforce_linf_bound",
    "ensure_finite",
    "finite_difference_grad",
    "forward_layer",
    "linf_distance",
    "linf_project",
    "relative_error",
    "softmax",
    "softmax_cross_entropy",
]

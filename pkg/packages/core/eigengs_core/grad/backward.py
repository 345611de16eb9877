"""
Analytic gradients of the squared-error loss through the rasterizer.

Both render modes share one objective shape: render, take the residual against
the target, and pull 2·residual/n back through ``rasterize_backward``. The
public entry points round predictions to float32 exactly as the public renders
do, so a target produced by ``render_components``/``render_image`` yields a
loss of exactly zero.
"""

import logging
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from eigengs_core.errors import NonFiniteError, ShapeError
from eigengs_core.models import (
    EigenGaussianModel,
    Freeze,
    ImageGaussianSet,
    PlanarImage,
    Subset,
)
from eigengs_core.splat.raster import (
    gaussian_geometry,
    position_chain,
    rasterize,
    rasterize_backward,
)

logger = logging.getLogger(__name__)


@dataclass
class GradBuffers:
    """Gradients mirroring a parameter set: positions, factors and weights."""

    d_pos_raw: np.ndarray
    d_fac_raw: np.ndarray
    d_weights: np.ndarray

    def __post_init__(self):
        self.d_pos_raw = np.ascontiguousarray(self.d_pos_raw, dtype=np.float32)
        self.d_fac_raw = np.ascontiguousarray(self.d_fac_raw, dtype=np.float32)
        self.d_weights = np.ascontiguousarray(self.d_weights, dtype=np.float32)
        if not all(np.all(np.isfinite(a)) for a in self.arrays().values()):
            raise NonFiniteError("Backward pass produced non-finite gradients")

    def arrays(self) -> dict[str, np.ndarray]:
        """Gradients keyed like the optimizer's parameter dict."""
        return {"pos_raw": self.d_pos_raw, "fac_raw": self.d_fac_raw, "weights": self.d_weights}

    def zero_rows(self, rows: slice) -> None:
        self.d_pos_raw[rows] = 0.0
        self.d_fac_raw[rows] = 0.0
        self.d_weights[rows] = 0.0


class Objective(NamedTuple):
    """Loss, float64 prediction and float64 gradients of one evaluation."""

    loss: float
    prediction: np.ndarray
    d_pos_raw: Optional[np.ndarray]
    d_fac_raw: Optional[np.ndarray]
    d_weights: Optional[np.ndarray]


def _evaluate(
    pos_raw: np.ndarray,
    fac_raw: np.ndarray,
    weights: np.ndarray,
    offset: Optional[np.ndarray],
    targets: np.ndarray,
    width: int,
    height: int,
    round_prediction: bool,
    with_grads: bool,
) -> Objective:
    geometry = gaussian_geometry(pos_raw, fac_raw, width, height)
    prediction = rasterize(geometry, weights)
    if offset is not None:
        prediction = prediction + offset
    if round_prediction:
        prediction = prediction.astype(np.float32).astype(np.float64)

    residual = prediction - targets
    loss = float(np.mean(residual * residual))
    if not with_grads:
        return Objective(loss, prediction, None, None, None)

    grad_out = (2.0 / residual.size) * residual
    d_weights, d_geo = rasterize_backward(geometry, weights, grad_out)
    d_pos = position_chain(pos_raw, d_geo[:, :2], width, height)
    return Objective(loss, prediction, d_pos, d_geo[:, 2:], d_weights)


def components_objective(
    pos_raw: np.ndarray,
    fac_raw: np.ndarray,
    weights: np.ndarray,
    targets: np.ndarray,
    width: int,
    height: int,
    round_prediction: bool = True,
    with_grads: bool = True,
) -> Objective:
    """
    Mean squared error of K component renders against (K, h, w, C) targets.

    Args:
        pos_raw: (N, 2) center logits
        fac_raw: (N, 3) raw factors
        weights: (N, K, C) reduced weights
        targets: (K, h, w, C) float64 targets
        round_prediction: Round the render to float32 before the residual
        with_grads: Also run the backward pass
    """
    return _evaluate(
        pos_raw, fac_raw, np.asarray(weights, dtype=np.float64), None,
        targets, width, height, round_prediction, with_grads,
    )


def image_objective(
    pos_raw: np.ndarray,
    fac_raw: np.ndarray,
    weights: np.ndarray,
    mean: np.ndarray,
    target: np.ndarray,
    width: int,
    height: int,
    round_prediction: bool = True,
    with_grads: bool = True,
) -> Objective:
    """Mean squared error of Ψ₀ + Σ c′ₙ·exp(−σₙ) against an (h, w, C) target."""
    result = _evaluate(
        pos_raw, fac_raw, np.asarray(weights, dtype=np.float64)[:, None, :],
        np.asarray(mean, dtype=np.float64)[None], np.asarray(target, dtype=np.float64)[None],
        width, height, round_prediction, with_grads,
    )
    d_weights = None if result.d_weights is None else result.d_weights[:, 0, :]
    return result._replace(prediction=result.prediction[0], d_weights=d_weights)


def stack_targets(targets: Sequence[PlanarImage], shape: tuple[int, int, int], count: int) -> np.ndarray:
    """Validate and stack component targets into a (K, h, w, C) float64 array."""
    if len(targets) != count:
        raise ShapeError(f"Expected {count} component targets, got {len(targets)}")
    for j, target in enumerate(targets):
        if target.shape != shape:
            raise ShapeError(f"Target {j} is {target.shape}, model renders {shape}")
    return np.stack([t.data for t in targets]).astype(np.float64)


def backward_components(
    model: EigenGaussianModel,
    targets: Sequence[PlanarImage],
    freeze: Freeze = Freeze.NONE,
) -> tuple[float, GradBuffers]:
    """
    Loss and gradients of the eigen-model against its component targets.

    Args:
        model: Eigen-model to differentiate
        targets: k images, one per component
        freeze: Zero the gradients of one partition

    Returns:
        (mean squared error over components, pixels and channels, gradients)

    Raises:
        ShapeError: Target count or shape does not match the model
    """
    freeze = Freeze(freeze)
    stacked = stack_targets(targets, (model.width, model.height, model.channels), model.k)

    result = components_objective(
        model.gaussians.pos_raw, model.gaussians.fac_raw, model.weights,
        stacked, model.width, model.height,
    )
    grads = GradBuffers(result.d_pos_raw, result.d_fac_raw, result.d_weights)

    if model.freq_learning:
        grads.d_weights[model.cross_mask()] = 0.0
    if freeze is Freeze.FREEZE_LOW:
        grads.zero_rows(model.partition_slice(Subset.LOW_ONLY))
    elif freeze is Freeze.FREEZE_HIGH:
        grads.zero_rows(model.partition_slice(Subset.HIGH_ONLY))

    return result.loss, grads


def backward_image(gaussian_set: ImageGaussianSet, target: PlanarImage) -> tuple[float, GradBuffers]:
    """
    Loss and gradients of an image Gaussian set against one target image.

    Raises:
        ShapeError: Target shape does not match the set
    """
    if target.shape != gaussian_set.shape:
        raise ShapeError(f"Target is {target.shape}, set renders {gaussian_set.shape}")

    result = image_objective(
        gaussian_set.gaussians.pos_raw, gaussian_set.gaussians.fac_raw, gaussian_set.weights,
        gaussian_set.mean_ref.data, target.data, gaussian_set.width, gaussian_set.height,
    )
    return result.loss, GradBuffers(result.d_pos_raw, result.d_fac_raw, result.d_weights)

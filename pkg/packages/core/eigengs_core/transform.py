"""
From a shared eigen-model to a per-image Gaussian set.

Rendering collapsed weights c′ₙ = Σⱼ wⱼ·ψ′ₙ,ⱼ over the mean gives exactly the
coefficient-weighted sum of component renders, so projecting an image onto the
basis yields its Gaussian representation with no optimization.
"""

import logging
from typing import Optional

import numpy as np

from eigengs_core.eigenbasis import project
from eigengs_core.errors import ShapeError
from eigengs_core.models import (
    ColorSpace,
    Eigenbasis,
    EigenGaussianModel,
    ImageGaussianSet,
    PlanarImage,
    ProjectionCoeffs,
)
from eigengs_core.train.eigen_fit import INIT_WEIGHT_STD, init_gaussians

logger = logging.getLogger(__name__)


def check_compatible(model: EigenGaussianModel, basis: Eigenbasis) -> None:
    """
    Raises:
        ShapeError: Basis and model disagree on shape, space or component count
    """
    if (
        basis.shape != (model.width, model.height, model.channels)
        or basis.k != model.k
        or basis.space is not model.space
    ):
        raise ShapeError(
            f"Basis {basis.shape}×{basis.k} ({basis.space.value}) does not match model "
            f"{model.basis_shape} ({model.space.value})"
        )


def collapse(model: EigenGaussianModel, coeffs: ProjectionCoeffs, basis: Eigenbasis) -> ImageGaussianSet:
    """
    Fold projection coefficients into per-Gaussian image weights.

    Args:
        model: Trained eigen-model
        coeffs: Coefficients wⱼ of one image
        basis: The basis the model was trained on

    Returns:
        ImageGaussianSet with copied geometry and mean_ref = basis mean

    Raises:
        ShapeError: Dimension mismatch between model, basis and coefficients
    """
    check_compatible(model, basis)
    if coeffs.k != model.k:
        raise ShapeError(f"Got {coeffs.k} coefficients for a {model.k}-component model")

    collapsed = np.einsum("nkc,k->nc", model.weights.astype(np.float64), coeffs.coeffs)
    return ImageGaussianSet(
        gaussians=model.gaussians.copy(),
        weights=collapsed.astype(np.float32),
        mean_ref=basis.mean,
    )


def init_for_image(model: EigenGaussianModel, basis: Eigenbasis, img: PlanarImage) -> ImageGaussianSet:
    """Instant Gaussian representation of an image: collapse its projection."""
    return collapse(model, project(basis, img), basis)


def random_image_set(
    n: int,
    width: int,
    height: int,
    space: ColorSpace,
    seed: int = 0,
    init_scale: float = 0.02,
    channels: Optional[int] = None,
) -> ImageGaussianSet:
    """
    Baseline set with random geometry, small random weights and a zero mean.

    Uses the same initialization as eigen-fitting, so fine-tuning from it is
    plain direct Gaussian fitting.
    """
    rng = np.random.default_rng(seed)
    space = ColorSpace(space)
    zero = PlanarImage.zeros(width, height, space, channels)
    gaussians = init_gaussians(n, width, height, init_scale, rng)
    weights = rng.normal(0.0, INIT_WEIGHT_STD, size=(n, zero.channels))
    return ImageGaussianSet(gaussians=gaussians, weights=weights, mean_ref=zero)

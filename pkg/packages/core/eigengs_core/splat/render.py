"""Public render entry points for eigen-models and image Gaussian sets."""

import logging

import numpy as np

from eigengs_core.models import (
    EigenGaussianModel,
    GaussianCloud,
    ImageGaussianSet,
    PlanarImage,
    Subset,
)
from eigengs_core.splat.raster import gaussian_geometry, rasterize

logger = logging.getLogger(__name__)


def subset_weights(model: EigenGaussianModel, subset: Subset) -> np.ndarray:
    """Model weights with every Gaussian outside ``subset`` zeroed, as float64."""
    weights = model.weights.astype(np.float64)
    if subset is Subset.ALL:
        return weights
    keep = np.zeros(model.n_gaussians, dtype=bool)
    keep[model.partition_slice(subset)] = True
    weights[~keep] = 0.0
    return weights


def render_component_planes(
    gaussians: GaussianCloud, weights: np.ndarray, width: int, height: int
) -> np.ndarray:
    """(K, h, w, C) float64 renders of (N, K, C) weights."""
    geometry = gaussian_geometry(gaussians.pos_raw, gaussians.fac_raw, width, height)
    return rasterize(geometry, weights)


def render_components(
    model: EigenGaussianModel, subset: Subset = Subset.ALL
) -> list[PlanarImage]:
    """
    Render Ψ̃ⱼ(x, y) = Σₙ ψ′ₙ,ⱼ·exp(−σₙ(x, y)) for every component j.

    Args:
        model: Trained or partially trained eigen-model
        subset: Restrict the sum to one partition

    Returns:
        k images in the model's color space
    """
    subset = Subset(subset)
    planes = render_component_planes(
        model.gaussians, subset_weights(model, subset), model.width, model.height
    )
    return [PlanarImage(plane, model.space) for plane in planes]


def render_image_array(gaussian_set: ImageGaussianSet) -> np.ndarray:
    """Ψ₀ + Σₙ c′ₙ·exp(−σₙ) as an (h, w, C) float32 array."""
    weights = gaussian_set.weights.astype(np.float64)[:, None, :]
    planes = render_component_planes(
        gaussian_set.gaussians, weights, gaussian_set.width, gaussian_set.height
    )
    mean = gaussian_set.mean_ref.data.astype(np.float64)
    return (mean + planes[0]).astype(np.float32)


def render_image(gaussian_set: ImageGaussianSet) -> PlanarImage:
    """Render a collapsed or fine-tuned image set, unclamped."""
    return PlanarImage(render_image_array(gaussian_set), gaussian_set.space)


def gaussian_radii(model: EigenGaussianModel) -> np.ndarray:
    """Per-Gaussian radius: sqrt of the larger eigenvalue of Σₙ, in pixels."""
    return model.gaussians.radii()


def _describe(radii: np.ndarray) -> dict[str, float]:
    if radii.size == 0:
        return {"count": 0, "median": float("nan"), "p10": float("nan"), "p90": float("nan")}
    p10, median, p90 = np.percentile(radii.astype(np.float64), [10, 50, 90])
    return {"count": int(radii.size), "median": float(median), "p10": float(p10), "p90": float(p90)}


def radius_summary(model: EigenGaussianModel) -> dict[str, dict[str, float]]:
    """
    Median and 10th/90th radius percentiles per partition.

    Returns:
        ``{"all": ..., "low": ..., "high": ...}``; the low/high entries are only
        present for models trained with frequency learning
    """
    radii = gaussian_radii(model)
    summary = {Subset.ALL.value: _describe(radii)}
    if model.freq_learning:
        summary[Subset.LOW_ONLY.value] = _describe(radii[model.partition_slice(Subset.LOW_ONLY)])
        summary[Subset.HIGH_ONLY.value] = _describe(radii[model.partition_slice(Subset.HIGH_ONLY)])
    return summary

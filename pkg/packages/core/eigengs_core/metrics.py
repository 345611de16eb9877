"""
Reconstruction quality: PSNR and SSIM in clamped display RGB.

Both metrics compare images after ``to_display_rgb``, so results from YCbCr and
RGB pipelines land in the same space. SSIM uses the BT.601 luma of color
images.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter

from eigengs_core.errors import ShapeError
from eigengs_core.imagecore.color import luma, to_display_rgb
from eigengs_core.models import PlanarImage

SSIM_SIGMA = 1.5
SSIM_TRUNCATE = 3.5  # radius 5: an 11×11 window at σ=1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


@dataclass(frozen=True)
class QualityScore:
    """PSNR in dB (``math.inf`` for identical images) and mean SSIM."""

    psnr_db: float
    ssim: float


def _check_pair(a: PlanarImage, b: PlanarImage) -> None:
    if a.shape != b.shape or a.space is not b.space:
        raise ShapeError(
            f"Cannot compare {a.shape}/{a.space.value} with {b.shape}/{b.space.value}"
        )


def psnr_from_mse(mse: float) -> float:
    """10·log10(1/MSE) for peak 1; inf when MSE is 0."""
    if mse <= 0:
        return math.inf
    return 10.0 * math.log10(1.0 / mse)


def psnr(a: PlanarImage, b: PlanarImage) -> float:
    """PSNR over all pixels and channels of the display RGB of two images."""
    _check_pair(a, b)
    diff = to_display_rgb(a) - to_display_rgb(b)
    return psnr_from_mse(float(np.mean(diff * diff)))


def structural_similarity(x: np.ndarray, y: np.ndarray, data_range: float = 1.0) -> float:
    """
    Mean SSIM of two 2D arrays with an 11×11 Gaussian window (σ = 1.5).

    Boundaries are handled by symmetric reflection. Inputs are not clamped.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 2:
        raise ShapeError(f"SSIM needs two equal 2D arrays, got {x.shape} and {y.shape}")

    c1 = (SSIM_K1 * data_range) ** 2
    c2 = (SSIM_K2 * data_range) ** 2

    def blur(plane: np.ndarray) -> np.ndarray:
        return gaussian_filter(plane, sigma=SSIM_SIGMA, truncate=SSIM_TRUNCATE, mode="reflect")

    mu_x = blur(x)
    mu_y = blur(y)
    var_x = blur(x * x) - mu_x * mu_x
    var_y = blur(y * y) - mu_y * mu_y
    cov = blur(x * y) - mu_x * mu_y

    numerator = (2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)
    denominator = (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2)
    return float(np.mean(numerator / denominator))


def ssim(a: PlanarImage, b: PlanarImage) -> float:
    """SSIM of the display luma of two images."""
    _check_pair(a, b)
    return structural_similarity(luma(to_display_rgb(a)), luma(to_display_rgb(b)))


def evaluate(a: PlanarImage, b: PlanarImage) -> QualityScore:
    return QualityScore(psnr_db=psnr(a, b), ssim=ssim(a, b))


def component_ssim(predictions: np.ndarray, targets: np.ndarray) -> float:
    """
    Mean SSIM over (K, h, w, C) component planes, using the luma of 3-channel planes.

    Eigenimages have no display range, so the planes are compared as given.
    """
    if predictions.shape != targets.shape:
        raise ShapeError(f"Component stacks differ: {predictions.shape} vs {targets.shape}")
    scores = [structural_similarity(luma(p), luma(t)) for p, t in zip(predictions, targets)]
    return float(np.mean(scores)) if scores else 1.0

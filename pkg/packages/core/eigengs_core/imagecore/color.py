"""
BT.601 studio-range RGB ↔ YCbCr conversion.

The forward transform is deliberately left unclamped: Y lands in
[16/255, 235/255] and Cb/Cr in [16/255, 240/255] for in-gamut input, and the
margins around those ranges absorb out-of-range PCA reconstructions. Clamping
happens once, in ``ycbcr_to_rgb`` / ``to_display_rgb``.
"""

import numpy as np

from eigengs_core.errors import ChannelMismatchError
from eigengs_core.models import ColorSpace, PlanarImage

# Rows: Y, Cb, Cr. Columns: R, G, B. Scaled for [0, 1] samples.
STUDIO_MATRIX = (
    np.array(
        [
            [65.481, 128.553, 24.966],
            [-37.797, -74.203, 112.0],
            [112.0, -93.786, -18.214],
        ]
    )
    / 255.0
)
STUDIO_OFFSET = np.array([16.0, 128.0, 128.0]) / 255.0
STUDIO_INVERSE = np.linalg.inv(STUDIO_MATRIX)

# Full-range BT.601 luma, used for grayscale conversion and SSIM.
LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])


def rgb_to_ycbcr(img: PlanarImage) -> PlanarImage:
    """Convert an RGB image to studio-range YCbCr (unclamped)."""
    if img.space is not ColorSpace.RGB or img.channels != 3:
        raise ChannelMismatchError(
            f"Expected a 3-channel RGB image, got {img.channels}-channel {img.space.value}"
        )
    rgb = img.data.astype(np.float64)
    return PlanarImage(rgb @ STUDIO_MATRIX.T + STUDIO_OFFSET, ColorSpace.YCBCR)


def ycbcr_to_rgb(img: PlanarImage) -> PlanarImage:
    """Invert the studio-range transform and clamp to [0, 1]."""
    if img.space is not ColorSpace.YCBCR or img.channels != 3:
        raise ChannelMismatchError(
            f"Expected a 3-channel YCbCr image, got {img.channels}-channel {img.space.value}"
        )
    ycc = img.data.astype(np.float64)
    rgb = (ycc - STUDIO_OFFSET) @ STUDIO_INVERSE.T
    return PlanarImage(np.clip(rgb, 0.0, 1.0), ColorSpace.RGB)


def luma(rgb: np.ndarray) -> np.ndarray:
    """BT.601 luma of an H×W×3 array (H×W×1 arrays pass through)."""
    if rgb.shape[-1] == 1:
        return rgb[..., 0].astype(np.float64)
    return rgb.astype(np.float64) @ LUMA_WEIGHTS


def to_display_rgb(img: PlanarImage) -> np.ndarray:
    """
    Final display samples as float64 in [0, 1].

    YCbCr goes through the inverse transform; RGB and linear images are clamped.
    The channel count is preserved for single-channel images.
    """
    if img.space is ColorSpace.YCBCR:
        return ycbcr_to_rgb(img).data.astype(np.float64)
    return np.clip(img.data.astype(np.float64), 0.0, 1.0)


def convert(img: PlanarImage, space: ColorSpace) -> PlanarImage:
    """Convert between working spaces. Grayscale targets use luma."""
    space = ColorSpace(space)
    if img.space is space:
        return img

    if space is ColorSpace.LINEAR:
        rgb = to_display_rgb(img) if img.space is ColorSpace.YCBCR else img.data
        return PlanarImage(luma(rgb)[:, :, None], ColorSpace.LINEAR)

    if img.space is ColorSpace.LINEAR:
        rgb = PlanarImage(np.repeat(img.data[:, :, :1], 3, axis=2), ColorSpace.RGB)
        return rgb if space is ColorSpace.RGB else rgb_to_ycbcr(rgb)

    if space is ColorSpace.YCBCR:
        return rgb_to_ycbcr(img)
    return ycbcr_to_rgb(img)

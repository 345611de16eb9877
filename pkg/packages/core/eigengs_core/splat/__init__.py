"""Gaussian rasterization: tile-binned forward and backward kernels."""

from .raster import (
    SIGMA_CUT,
    TILE_SIZE,
    SplatGeometry,
    gaussian_geometry,
    position_chain,
    rasterize,
    rasterize_backward,
)
from .render import (
    gaussian_radii,
    radius_summary,
    render_component_planes,
    render_components,
    render_image,
    render_image_array,
    subset_weights,
)

__all__ = [
    "SIGMA_CUT",
    "TILE_SIZE",
    "SplatGeometry",
    "gaussian_geometry",
    "position_chain",
    "rasterize",
    "rasterize_backward",
    "gaussian_radii",
    "radius_summary",
    "render_component_planes",
    "render_components",
    "render_image",
    "render_image_array",
    "subset_weights",
]

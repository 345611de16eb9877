"""Image buffers, PNG I/O, corpus ingestion and color conversion."""

from .color import (
    rgb_to_ycbcr,
    ycbcr_to_rgb,
    to_display_rgb,
    convert,
    luma,
    STUDIO_MATRIX,
    STUDIO_OFFSET,
)
from .png import decode_png, save_png, to_uint8
from .corpus import load_corpus, load_image, resize_bilinear

__all__ = [
    "rgb_to_ycbcr",
    "ycbcr_to_rgb",
    "to_display_rgb",
    "convert",
    "luma",
    "STUDIO_MATRIX",
    "STUDIO_OFFSET",
    "decode_png",
    "save_png",
    "to_uint8",
    "load_corpus",
    "load_image",
    "resize_bilinear",
]

"""Persistence: EGS1 model files, CSV reports and SVG curves."""

from .model_file import (
    FORMAT_VERSION,
    HEADER,
    MAGIC,
    ModelBundle,
    decode_model,
    encode_model,
    load_model,
    save_model,
)
from .reports import format_value, read_report, write_report, write_rows
from .curves import render_curve_svg, write_curve_svg

__all__ = [
    "FORMAT_VERSION",
    "HEADER",
    "MAGIC",
    "ModelBundle",
    "decode_model",
    "encode_model",
    "load_model",
    "save_model",
    "format_value",
    "read_report",
    "write_report",
    "write_rows",
    "render_curve_svg",
    "write_curve_svg",
]

"""PNG decode/encode via Pillow; OpenCV reads 16-bit color files."""

import logging
from pathlib import Path

import cv2
import numpy as np
from PIL import Image

from eigengs_core.imagecore.color import to_display_rgb
from eigengs_core.models import PlanarImage

logger = logging.getLogger(__name__)

_SIXTEEN_BIT_MODES = {"I;16", "I;16B", "I;16L", "I"}
_GRAY_MODES = {"1", "L", "LA"}
_COLOR_MODES = {"RGB", "RGBA"}


def _is_sixteen_bit_color(im: Image.Image) -> bool:
    """True for 16-bit RGB/RGBA PNGs, which Pillow exposes as 8-bit modes."""
    if im.mode not in _COLOR_MODES or not im.tile:
        return False
    rawmode = im.tile[0][3]
    if isinstance(rawmode, tuple):
        rawmode = rawmode[0]
    return isinstance(rawmode, str) and rawmode.endswith(";16B")


def _decode_sixteen_bit_color(path: str | Path) -> np.ndarray:
    raw = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if raw is None or raw.dtype != np.uint16 or raw.ndim != 3:
        raise ValueError(f"Cannot decode 16-bit color PNG {path}")
    code = cv2.COLOR_BGRA2RGB if raw.shape[2] == 4 else cv2.COLOR_BGR2RGB
    return cv2.cvtColor(raw, code).astype(np.float64) / 65535.0


def decode_png(path: str | Path) -> np.ndarray:
    """
    Decode a PNG into float64 samples in [0, 1].

    Returns:
        H×W×1 for grayscale files, H×W×3 otherwise (alpha dropped)
    """
    with Image.open(path) as im:
        # The tile list holds the file's raw sample layout until load().
        if _is_sixteen_bit_color(im):
            return _decode_sixteen_bit_color(path)
        im.load()
        if im.mode in _SIXTEEN_BIT_MODES:
            data = np.asarray(im, dtype=np.float64) / 65535.0
            return np.clip(data, 0.0, 1.0)[:, :, None]
        if im.mode in _GRAY_MODES:
            data = np.asarray(im.convert("L"), dtype=np.float64) / 255.0
            return data[:, :, None]
        return np.asarray(im.convert("RGB"), dtype=np.float64) / 255.0


def to_uint8(img: PlanarImage) -> np.ndarray:
    """Clamp to display RGB and quantize with round-half-up."""
    display = to_display_rgb(img)
    return np.floor(display * 255.0 + 0.5).astype(np.uint8)


def save_png(img: PlanarImage, path: str | Path) -> Path:
    """Write an image as an 8-bit PNG (gray for 1 channel, RGB for 3)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    pixels = to_uint8(img)
    if pixels.shape[2] == 1:
        Image.fromarray(pixels[:, :, 0]).save(path)
    else:
        Image.fromarray(pixels).save(path)

    logger.debug(f"Wrote {img.width}×{img.height} PNG to {path}")
    return path

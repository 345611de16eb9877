"""Corpus ingestion: decode, resize and convert a directory of PNGs."""

import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Optional

import numpy as np
from scipy import ndimage

from eigengs_core.config import get_settings
from eigengs_core.errors import CorpusEmptyError
from eigengs_core.imagecore.color import convert
from eigengs_core.imagecore.png import decode_png
from eigengs_core.models import ColorSpace, ImageCorpus, PlanarImage

logger = logging.getLogger(__name__)

MIN_CORPUS_SIZE = 2


def resize_bilinear(data: np.ndarray, width: int, height: int) -> np.ndarray:
    """
    Bilinear resize of an H×W×C array with edge clamping.

    Output pixel centers map to source coordinates ``(x + 0.5)·W/w − 0.5``;
    samples beyond the border repeat the edge.
    """
    src_h, src_w = data.shape[:2]
    if (src_w, src_h) == (width, height):
        return np.array(data, dtype=np.float64, copy=True)

    ys = (np.arange(height) + 0.5) * (src_h / height) - 0.5
    xs = (np.arange(width) + 0.5) * (src_w / width) - 0.5
    grid = np.meshgrid(ys, xs, indexing="ij")

    channels = [
        ndimage.map_coordinates(
            data[:, :, c].astype(np.float64), grid, order=1, mode="nearest"
        )
        for c in range(data.shape[2])
    ]
    return np.stack(channels, axis=2)


def _to_space(samples: np.ndarray, space: ColorSpace) -> PlanarImage:
    if samples.shape[2] == 1:
        image = PlanarImage(samples, ColorSpace.LINEAR)
    else:
        image = PlanarImage(samples, ColorSpace.RGB)
    return convert(image, space)


def load_image(
    path: str | Path,
    space: ColorSpace,
    target: Optional[tuple[int, int]] = None,
) -> PlanarImage:
    """
    Load one PNG into ``space``.

    Args:
        path: PNG file
        space: Working color space of the result
        target: Optional (w, h) to resize to before conversion

    Returns:
        PlanarImage with samples in [0, 1] before conversion
    """
    samples = decode_png(path)
    if target is not None:
        samples = resize_bilinear(samples, *target)
    return _to_space(samples, space)


def load_corpus(
    dir_path: str | Path,
    target: tuple[int, int],
    space: ColorSpace,
    max_workers: Optional[int] = None,
) -> ImageCorpus:
    """
    Decode every PNG in a directory, in lexicographic file-name order.

    Undecodable files are skipped with a warning.

    Args:
        dir_path: Directory holding the PNGs
        target: (w, h) every image is bilinearly resized to
        space: Working color space
        max_workers: Decoder threads (default: the configured thread cap)

    Returns:
        ImageCorpus with at least two images

    Raises:
        CorpusEmptyError: No PNGs, or fewer than two decodable ones
    """
    dir_path = Path(dir_path)
    if not dir_path.is_dir():
        raise FileNotFoundError(f"Corpus directory not found: {dir_path}")

    files = sorted(
        (p for p in dir_path.iterdir() if p.is_file() and p.suffix.lower() == ".png"),
        key=lambda p: p.name,
    )
    if not files:
        raise CorpusEmptyError(f"No PNG files in {dir_path}")

    logger.info(f"Loading {len(files)} images from {dir_path} at {target[0]}×{target[1]} ({space.value})")

    def _load(path: Path) -> Optional[PlanarImage]:
        try:
            return load_image(path, space, target)
        except Exception as e:
            logger.warning(f"Skipping {path.name}: {e}")
            return None

    if max_workers is None:
        max_workers = get_settings().thread_count
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        loaded = list(pool.map(_load, files))

    images = [img for img in loaded if img is not None]
    names = [path.name for path, img in zip(files, loaded) if img is not None]

    if len(images) < MIN_CORPUS_SIZE:
        raise CorpusEmptyError(
            f"Only {len(images)} decodable images in {dir_path}, need at least {MIN_CORPUS_SIZE}"
        )

    logger.info(f"Loaded corpus of {len(images)} images")
    return ImageCorpus(tuple(images), tuple(names))

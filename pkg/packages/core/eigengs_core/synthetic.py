"""
Seeded synthetic corpora: smooth color blobs over linear gradients.

Stand-in for face/object datasets in desk-scale experiments; images share
global structure (gradients) while blob placement gives the corpus a long
eigen-spectrum.
"""

import logging
from pathlib import Path

import numpy as np

from eigengs_core.imagecore.color import convert
from eigengs_core.imagecore.png import save_png
from eigengs_core.models import ColorSpace, ImageCorpus, PlanarImage

logger = logging.getLogger(__name__)

MIN_BLOBS = 3
MAX_BLOBS = 6


def generate_image(width: int, height: int, rng: np.random.Generator, channels: int = 3) -> np.ndarray:
    """One H×W×C image in [0, 1]."""
    ys, xs = np.mgrid[0:height, 0:width]
    u = (xs + 0.5) / width
    v = (ys + 0.5) / height

    base = rng.uniform(0.2, 0.6, size=channels)
    slope_x = rng.uniform(-0.3, 0.3, size=channels)
    slope_y = rng.uniform(-0.3, 0.3, size=channels)
    image = base + slope_x * (u[..., None] - 0.5) + slope_y * (v[..., None] - 0.5)

    for _ in range(rng.integers(MIN_BLOBS, MAX_BLOBS + 1)):
        cx, cy = rng.uniform(0.15, 0.85, size=2)
        sx, sy = rng.uniform(0.06, 0.2, size=2)
        amplitude = rng.uniform(-0.4, 0.4, size=channels)
        falloff = np.exp(-0.5 * (((u - cx) / sx) ** 2 + ((v - cy) / sy) ** 2))
        image = image + falloff[..., None] * amplitude

    return np.clip(image, 0.0, 1.0)


def generate_corpus(
    count: int,
    width: int,
    height: int,
    space: ColorSpace = ColorSpace.YCBCR,
    seed: int = 0,
) -> ImageCorpus:
    """
    Generate ``count`` images directly in ``space``.

    Grayscale corpora use ``ColorSpace.LINEAR``.
    """
    space = ColorSpace(space)
    rng = np.random.default_rng(seed)
    channels = 1 if space is ColorSpace.LINEAR else 3
    base_space = ColorSpace.LINEAR if channels == 1 else ColorSpace.RGB

    images = tuple(
        convert(PlanarImage(generate_image(width, height, rng, channels), base_space), space)
        for _ in range(count)
    )
    names = tuple(f"synth_{i:05d}.png" for i in range(count))
    return ImageCorpus(images, names)


def write_corpus(
    out_dir: str | Path,
    count: int,
    width: int,
    height: int,
    seed: int = 0,
    grayscale: bool = False,
) -> list[Path]:
    """Write a generated corpus as 8-bit PNGs named ``synth_00000.png``, ..."""
    out_dir = Path(out_dir)
    space = ColorSpace.LINEAR if grayscale else ColorSpace.RGB
    corpus = generate_corpus(count, width, height, space, seed)
    paths = [save_png(image, out_dir / name) for image, name in zip(corpus, corpus.names)]
    logger.info(f"Wrote {len(paths)} synthetic {width}×{height} images to {out_dir}")
    return paths

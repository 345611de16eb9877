"""
EGS1 model file: eigenbasis and eigen-model in one little-endian binary.

Layout::

    header   "EGS1", version u32, w, h, C, k, N, n_low, k_low (u32), space tag (u8)
    mean         d      f32
    components   k·d    f32
    eigenvalues  k      f64
    pos_raw      N·2    f32
    fac_raw      N·3    f32
    weights      N·k·C  f32
    crc32 of every preceding byte (u32)

with d = w·h·C. Encoding is a pure function of the arrays, so save→load→save
reproduces a file byte for byte.
"""

import logging
import struct
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from eigengs_core.errors import EigenGSError, ModelFormatError
from eigengs_core.models import ColorSpace, Eigenbasis, EigenGaussianModel, GaussianCloud, PlanarImage

logger = logging.getLogger(__name__)

MAGIC = b"EGS1"
FORMAT_VERSION = 1
HEADER = struct.Struct("<4sI7IB")
CRC = struct.Struct("<I")

SPACE_TAGS = {ColorSpace.LINEAR: 0, ColorSpace.RGB: 1, ColorSpace.YCBCR: 2}
TAG_SPACES = {tag: space for space, tag in SPACE_TAGS.items()}


@dataclass(frozen=True)
class ModelBundle:
    """What an EGS1 file holds: the basis and the model trained on it."""

    basis: Eigenbasis
    model: EigenGaussianModel


def encode_model(basis: Eigenbasis, model: EigenGaussianModel) -> bytes:
    """Serialize a basis/model pair to EGS1 bytes."""
    width, height, channels = basis.shape
    header = HEADER.pack(
        MAGIC,
        FORMAT_VERSION,
        width,
        height,
        channels,
        basis.k,
        model.n_gaussians,
        model.n_low,
        model.k_low,
        SPACE_TAGS[basis.space],
    )
    payload = b"".join(
        [
            header,
            basis.mean.data.astype("<f4").tobytes(),
            basis.components.astype("<f4").tobytes(),
            basis.eigenvalues.astype("<f8").tobytes(),
            model.gaussians.pos_raw.astype("<f4").tobytes(),
            model.gaussians.fac_raw.astype("<f4").tobytes(),
            model.weights.astype("<f4").tobytes(),
        ]
    )
    return payload + CRC.pack(zlib.crc32(payload))


def _expected_size(w: int, h: int, c: int, k: int, n: int) -> int:
    d = w * h * c
    return HEADER.size + 4 * d + 4 * k * d + 8 * k + 4 * n * 2 + 4 * n * 3 + 4 * n * k * c + CRC.size


def decode_model(data: bytes) -> ModelBundle:
    """
    Parse EGS1 bytes.

    Raises:
        ModelFormatError: Bad magic, version, space tag, length, CRC or content
    """
    if len(data) < HEADER.size + CRC.size:
        raise ModelFormatError(f"File too short for an EGS1 header ({len(data)} bytes)")

    magic, version, w, h, c, k, n, n_low, k_low, tag = HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise ModelFormatError(f"Bad magic {magic!r}, expected {MAGIC!r}")
    if version != FORMAT_VERSION:
        raise ModelFormatError(f"Unsupported EGS1 version {version}")
    if tag not in TAG_SPACES:
        raise ModelFormatError(f"Unknown color space tag {tag}")

    expected = _expected_size(w, h, c, k, n)
    if len(data) != expected:
        raise ModelFormatError(f"Header declares {expected} bytes, file has {len(data)}")

    (stored_crc,) = CRC.unpack_from(data, len(data) - CRC.size)
    actual_crc = zlib.crc32(data[: len(data) - CRC.size])
    if stored_crc != actual_crc:
        raise ModelFormatError(f"CRC mismatch: stored {stored_crc:08x}, computed {actual_crc:08x}")

    d = w * h * c
    offset = HEADER.size

    def take(dtype: str, count: int) -> np.ndarray:
        nonlocal offset
        array = np.frombuffer(data, dtype=dtype, count=count, offset=offset)
        offset += array.nbytes
        return array.astype(dtype[1:])

    mean = take("<f4", d)
    components = take("<f4", k * d)
    eigenvalues = take("<f8", k)
    pos_raw = take("<f4", n * 2)
    fac_raw = take("<f4", n * 3)
    weights = take("<f4", n * k * c)

    space = TAG_SPACES[tag]
    try:
        basis = Eigenbasis(
            mean=PlanarImage(mean.reshape(h, w, c), space),
            components=components.reshape(k, d),
            eigenvalues=eigenvalues,
        )
        model = EigenGaussianModel(
            gaussians=GaussianCloud(pos_raw.reshape(n, 2), fac_raw.reshape(n, 3)),
            weights=weights.reshape(n, k, c),
            n_low=n_low,
            k_low=k_low,
            width=w,
            height=h,
            space=space,
        )
    except EigenGSError as e:
        raise ModelFormatError(f"Invalid model content: {e}") from e

    return ModelBundle(basis=basis, model=model)


def save_model(path: str | Path, basis: Eigenbasis, model: EigenGaussianModel) -> Path:
    """Write an EGS1 file, creating parent directories."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = encode_model(basis, model)
    path.write_bytes(data)
    logger.info(f"Saved model ({len(data)} bytes, k={basis.k}, N={model.n_gaussians}) to {path}")
    return path


def load_model(path: str | Path) -> ModelBundle:
    """
    Read an EGS1 file.

    Raises:
        FileNotFoundError: Path does not exist
        ModelFormatError: File is not a valid EGS1 model
    """
    path = Path(path)
    bundle = decode_model(path.read_bytes())
    logger.debug(f"Loaded model {path}: {bundle.model.basis_shape}, N={bundle.model.n_gaussians}")
    return bundle

"""Image buffers: planar float images and shape-uniform corpora."""

import enum
from dataclasses import dataclass, field

import numpy as np

from eigengs_core.errors import ChannelMismatchError, NonFiniteError, ShapeError


class ColorSpace(str, enum.Enum):
    """Working color space of an image."""

    LINEAR = "linear"  # intensity, usually single channel
    RGB = "rgb"
    YCBCR = "ycbcr"


def _freeze(array: np.ndarray) -> np.ndarray:
    array = np.ascontiguousarray(array)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class PlanarImage:
    """
    An H×W×C float32 image in a declared color space.

    Samples are nominally in [0, 1]. Reconstructions and renders may leave that
    range; values are only clamped when exporting to display RGB.
    """

    data: np.ndarray
    space: ColorSpace

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float32)
        if data.ndim == 2:
            data = data[:, :, None]
        if data.ndim != 3:
            raise ShapeError(f"Image data must be H×W×C, got shape {data.shape}")

        height, width, channels = data.shape
        if width < 1 or height < 1:
            raise ShapeError(f"Image must be at least 1×1, got {width}×{height}")
        if channels not in (1, 3):
            raise ChannelMismatchError(f"Images carry 1 or 3 channels, got {channels}")
        if self.space in (ColorSpace.RGB, ColorSpace.YCBCR) and channels != 3:
            raise ChannelMismatchError(f"{self.space.value} images need 3 channels, got {channels}")
        if not np.all(np.isfinite(data)):
            raise NonFiniteError("Image contains NaN or Inf samples")

        object.__setattr__(self, "data", _freeze(data))
        object.__setattr__(self, "space", ColorSpace(self.space))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    @property
    def shape(self) -> tuple[int, int, int]:
        """(w, h, C)."""
        return self.width, self.height, self.channels

    @property
    def size(self) -> int:
        """Sample count w·h·C."""
        return self.data.size

    def flat(self) -> np.ndarray:
        """Row-major samples as a float64 vector of length w·h·C."""
        return self.data.astype(np.float64).ravel()

    def with_data(self, data: np.ndarray) -> "PlanarImage":
        """New image in the same space with replaced samples."""
        return PlanarImage(np.asarray(data).reshape(self.data.shape), self.space)

    @classmethod
    def zeros(cls, width: int, height: int, space: ColorSpace, channels: int | None = None) -> "PlanarImage":
        if channels is None:
            channels = 1 if space is ColorSpace.LINEAR else 3
        return cls(np.zeros((height, width, channels), dtype=np.float32), space)


@dataclass(frozen=True, eq=False)
class ImageCorpus:
    """Images sharing one (w, h, C, space) signature, in a fixed order."""

    images: tuple[PlanarImage, ...]
    names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        images = tuple(self.images)
        if not images:
            raise ShapeError("A corpus needs at least one image")

        first = images[0]
        for index, image in enumerate(images[1:], start=1):
            if image.shape != first.shape or image.space != first.space:
                raise ShapeError(
                    f"Corpus image {index} is {image.shape}/{image.space.value}, "
                    f"expected {first.shape}/{first.space.value}"
                )

        names = tuple(self.names) or tuple(f"image_{i:05d}" for i in range(len(images)))
        if len(names) != len(images):
            raise ShapeError(f"{len(names)} names given for {len(images)} images")

        object.__setattr__(self, "images", images)
        object.__setattr__(self, "names", names)

    def __len__(self) -> int:
        return len(self.images)

    def __iter__(self):
        return iter(self.images)

    def __getitem__(self, index: int) -> PlanarImage:
        return self.images[index]

    @property
    def count(self) -> int:
        return len(self.images)

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.images[0].shape

    @property
    def space(self) -> ColorSpace:
        return self.images[0].space

    def as_matrix(self) -> np.ndarray:
        """Stack flattened images into an (m, d) float64 matrix."""
        return np.stack([image.flat() for image in self.images])

"""PCA basis types: mean image, eigenimages, projection coefficients."""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from eigengs_core.errors import NonFiniteError, ShapeError
from eigengs_core.models.image import ColorSpace, PlanarImage


@dataclass(frozen=True, eq=False)
class Eigenbasis:
    """
    Mean image Ψ₀ plus k orthonormal eigenimages.

    ``components`` is a (k, d) float32 matrix whose rows are the eigenimages
    flattened in the same row-major order as ``PlanarImage.flat``.
    ``eigenvalues`` are the matching covariance eigenvalues, non-increasing.
    """

    mean: PlanarImage
    components: np.ndarray
    eigenvalues: np.ndarray
    total_variance: Optional[float] = None

    def __post_init__(self):
        components = np.ascontiguousarray(self.components, dtype=np.float32)
        eigenvalues = np.ascontiguousarray(self.eigenvalues, dtype=np.float64)

        if components.ndim != 2 or components.shape[1] != self.mean.size:
            raise ShapeError(
                f"Components must be k×{self.mean.size}, got {components.shape}"
            )
        if eigenvalues.shape != (components.shape[0],):
            raise ShapeError(
                f"Expected {components.shape[0]} eigenvalues, got {eigenvalues.shape}"
            )
        if components.shape[0] < 1:
            raise ShapeError("A basis needs at least one component")

        components.setflags(write=False)
        eigenvalues.setflags(write=False)
        object.__setattr__(self, "components", components)
        object.__setattr__(self, "eigenvalues", eigenvalues)

    @property
    def k(self) -> int:
        return self.components.shape[0]

    @property
    def d(self) -> int:
        return self.components.shape[1]

    @property
    def width(self) -> int:
        return self.mean.width

    @property
    def height(self) -> int:
        return self.mean.height

    @property
    def channels(self) -> int:
        return self.mean.channels

    @property
    def space(self) -> ColorSpace:
        return self.mean.space

    @property
    def shape(self) -> tuple[int, int, int]:
        """(w, h, C) of every image the basis covers."""
        return self.mean.shape

    def component_array(self) -> np.ndarray:
        """Eigenimages as a (k, h, w, C) float64 array."""
        return self.components.astype(np.float64).reshape(
            self.k, self.height, self.width, self.channels
        )

    def component_image(self, j: int) -> PlanarImage:
        return PlanarImage(self.components[j].reshape(self.mean.data.shape), self.space)

    def component_images(self) -> list[PlanarImage]:
        return [self.component_image(j) for j in range(self.k)]

    def explained_variance_ratio(self) -> np.ndarray:
        """Share of corpus variance captured by each kept component."""
        total = self.total_variance or float(self.eigenvalues.sum())
        if total <= 0:
            return np.zeros(self.k)
        return self.eigenvalues / total


@dataclass(frozen=True, eq=False)
class ProjectionCoeffs:
    """Coefficients wⱼ of one image against a basis."""

    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.ascontiguousarray(self.coeffs, dtype=np.float64).ravel()
        if not np.all(np.isfinite(coeffs)):
            raise NonFiniteError("Projection coefficients must be finite")
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)

    def __len__(self) -> int:
        return self.coeffs.shape[0]

    @property
    def k(self) -> int:
        return len(self)

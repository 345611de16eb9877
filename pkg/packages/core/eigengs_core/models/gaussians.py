"""
Gaussian primitives and the two model types built from them.

A Gaussian is stored as raw, unconstrained parameters:

- ``pos_raw`` (2): logits of the center μ ∈ (0, 1)², scaled by (w, h) at render time
- ``fac_raw`` (3): (a, b, c) of the lower-triangular factor
  L = [[exp(a), 0], [b, exp(c)]] with Σ⁻¹ = L·Lᵀ in pixel units

so every finite parameter vector is a valid Gaussian.
"""

import enum
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from eigengs_core.errors import NonFiniteError, ShapeError
from eigengs_core.models.image import ColorSpace, PlanarImage


class Subset(str, enum.Enum):
    """Which partition of an eigen-model to render."""

    ALL = "all"
    LOW_ONLY = "low"
    HIGH_ONLY = "high"


class Freeze(str, enum.Enum):
    """Which partition's gradients to zero."""

    NONE = "none"
    FREEZE_LOW = "freeze_low"
    FREEZE_HIGH = "freeze_high"


@dataclass(frozen=True)
class Gaussian2D:
    """A single Gaussian, mostly useful for construction and inspection."""

    pos_raw: tuple[float, float]
    fac_raw: tuple[float, float, float]

    @property
    def center(self) -> tuple[float, float]:
        """Normalized center μ ∈ (0, 1)²."""
        mu = expit(np.asarray(self.pos_raw, dtype=np.float64))
        return float(mu[0]), float(mu[1])

    def inverse_covariance(self) -> np.ndarray:
        a, b, c = self.fac_raw
        factor = np.array([[np.exp(a), 0.0], [b, np.exp(c)]])
        return factor @ factor.T

    def covariance(self) -> np.ndarray:
        return np.linalg.inv(self.inverse_covariance())


@dataclass(eq=False)
class GaussianCloud:
    """Struct-of-arrays storage for |𝒩| Gaussians."""

    pos_raw: np.ndarray
    fac_raw: np.ndarray

    def __post_init__(self):
        self.pos_raw = np.ascontiguousarray(self.pos_raw, dtype=np.float32).reshape(-1, 2)
        self.fac_raw = np.ascontiguousarray(self.fac_raw, dtype=np.float32).reshape(-1, 3)
        if self.pos_raw.shape[0] != self.fac_raw.shape[0]:
            raise ShapeError(
                f"{self.pos_raw.shape[0]} positions but {self.fac_raw.shape[0]} factors"
            )
        if not (np.all(np.isfinite(self.pos_raw)) and np.all(np.isfinite(self.fac_raw))):
            raise NonFiniteError("Gaussian parameters must be finite")

    def __len__(self) -> int:
        return self.pos_raw.shape[0]

    def __getitem__(self, index: int) -> Gaussian2D:
        return Gaussian2D(
            pos_raw=tuple(float(v) for v in self.pos_raw[index]),
            fac_raw=tuple(float(v) for v in self.fac_raw[index]),
        )

    @classmethod
    def from_gaussians(cls, gaussians: list[Gaussian2D]) -> "GaussianCloud":
        return cls(
            pos_raw=np.array([g.pos_raw for g in gaussians], dtype=np.float32).reshape(-1, 2),
            fac_raw=np.array([g.fac_raw for g in gaussians], dtype=np.float32).reshape(-1, 3),
        )

    def copy(self) -> "GaussianCloud":
        return GaussianCloud(self.pos_raw.copy(), self.fac_raw.copy())

    def take(self, selection: slice) -> "GaussianCloud":
        return GaussianCloud(self.pos_raw[selection].copy(), self.fac_raw[selection].copy())

    def concat(self, other: "GaussianCloud") -> "GaussianCloud":
        return GaussianCloud(
            np.concatenate([self.pos_raw, other.pos_raw]),
            np.concatenate([self.fac_raw, other.fac_raw]),
        )

    def means(self) -> np.ndarray:
        """Normalized centers, (N, 2) float64 in (0, 1)."""
        return expit(self.pos_raw.astype(np.float64))

    def inverse_covariances(self) -> np.ndarray:
        """Σ⁻¹ per Gaussian, (N, 2, 2) float64, pixel units."""
        fac = self.fac_raw.astype(np.float64)
        la, lb, lc = np.exp(fac[:, 0]), fac[:, 1], np.exp(fac[:, 2])
        inv = np.empty((len(self), 2, 2))
        inv[:, 0, 0] = la * la
        inv[:, 0, 1] = inv[:, 1, 0] = la * lb
        inv[:, 1, 1] = lb * lb + lc * lc
        return inv

    def covariances(self) -> np.ndarray:
        return np.linalg.inv(self.inverse_covariances())

    def radii(self) -> np.ndarray:
        """sqrt of the larger eigenvalue of Σ, in pixels (float32)."""
        if len(self) == 0:
            return np.zeros(0, dtype=np.float32)
        smallest = np.linalg.eigvalsh(self.inverse_covariances())[:, 0]
        return (1.0 / np.sqrt(smallest)).astype(np.float32)


@dataclass(eq=False)
class EigenGaussianModel:
    """
    Shared Gaussians fitted to a truncated eigenbasis.

    ``weights`` is (N, k, C): the reduced weight ψ′ of Gaussian n for component
    j and channel c. With frequency learning, Gaussians ``[:n_low]`` form the
    low-frequency set and only carry weight for components ``[:k_low]``; the
    rest carry weight only for components ``[k_low:]``. ``n_low == 0`` means a
    single undivided set.
    """

    gaussians: GaussianCloud
    weights: np.ndarray
    n_low: int
    k_low: int
    width: int
    height: int
    space: ColorSpace

    def __post_init__(self):
        self.weights = np.ascontiguousarray(self.weights, dtype=np.float32)
        self.space = ColorSpace(self.space)
        n = len(self.gaussians)

        if self.weights.ndim != 3 or self.weights.shape[0] != n:
            raise ShapeError(f"Weights must be {n}×k×C, got {self.weights.shape}")
        if self.weights.shape[2] not in (1, 3):
            raise ShapeError(f"Weights must carry 1 or 3 channels, got {self.weights.shape[2]}")
        if not np.all(np.isfinite(self.weights)):
            raise NonFiniteError("Model weights must be finite")

        k = self.weights.shape[1]
        if self.n_low == 0:
            if self.k_low != 0:
                raise ShapeError("k_low must be 0 when the model has no low-frequency set")
        else:
            if not 0 < self.n_low < n:
                raise ShapeError(f"n_low must lie in (0, {n}), got {self.n_low}")
            if not 0 < self.k_low < k:
                raise ShapeError(f"k_low must lie in (0, {k}), got {self.k_low}")
            if np.any(self.weights[self.cross_mask()] != 0):
                raise ShapeError("Cross-partition weights must be exactly zero")

    @property
    def k(self) -> int:
        return self.weights.shape[1]

    @property
    def channels(self) -> int:
        return self.weights.shape[2]

    @property
    def n_gaussians(self) -> int:
        return len(self.gaussians)

    @property
    def basis_shape(self) -> tuple[int, int, int, int]:
        """(w, h, C, k)."""
        return self.width, self.height, self.channels, self.k

    @property
    def freq_learning(self) -> bool:
        return self.n_low > 0

    def partition_slice(self, subset: Subset) -> slice:
        if subset is Subset.LOW_ONLY:
            return slice(0, self.n_low)
        if subset is Subset.HIGH_ONLY:
            return slice(self.n_low, self.n_gaussians)
        return slice(0, self.n_gaussians)

    def cross_mask(self) -> np.ndarray:
        """(N, k) True where Gaussian and component belong to different partitions."""
        low_gaussian = np.arange(self.n_gaussians) < self.n_low
        low_component = np.arange(self.k) < self.k_low
        return low_gaussian[:, None] != low_component[None, :]


@dataclass(eq=False)
class ImageGaussianSet:
    """Gaussians with collapsed per-channel weights c′ for one image."""

    gaussians: GaussianCloud
    weights: np.ndarray
    mean_ref: PlanarImage

    def __post_init__(self):
        self.weights = np.ascontiguousarray(self.weights, dtype=np.float32)
        n = len(self.gaussians)
        if n == 0:
            raise ShapeError("An image set needs at least one Gaussian")
        if self.weights.shape != (n, self.mean_ref.channels):
            raise ShapeError(
                f"Weights must be {n}×{self.mean_ref.channels}, got {self.weights.shape}"
            )
        if not np.all(np.isfinite(self.weights)):
            raise NonFiniteError("Collapsed weights must be finite")

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.mean_ref.shape

    @property
    def width(self) -> int:
        return self.mean_ref.width

    @property
    def height(self) -> int:
        return self.mean_ref.height

    @property
    def space(self) -> ColorSpace:
        return self.mean_ref.space

    def with_params(
        self, pos_raw: np.ndarray, fac_raw: np.ndarray, weights: np.ndarray
    ) -> "ImageGaussianSet":
        return ImageGaussianSet(GaussianCloud(pos_raw, fac_raw), weights, self.mean_ref)

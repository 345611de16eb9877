"""
Truncated PCA basis of an image corpus via the snapshot method.

The covariance (1/m)·VᵀV of the centered corpus is d×d, which is far too large
for real images; its non-zero spectrum equals that of the m×m Gram matrix
(1/m)·V·Vᵀ, and eigenvectors map across with Vᵀ.
"""

import logging

import numpy as np

from eigengs_core.errors import CorpusEmptyError, RankError, ShapeError
from eigengs_core.models import Eigenbasis, ImageCorpus, PlanarImage, ProjectionCoeffs

logger = logging.getLogger(__name__)


def _numerical_rank(eigenvalues: np.ndarray, reference: float, size: int) -> int:
    """Count Gram eigenvalues above the round-off floor of an eigensolve of that size."""
    tol = max(eigenvalues.max(initial=0.0), reference) * size * np.finfo(np.float64).eps
    return int(np.count_nonzero(eigenvalues > tol))


def _orient(components: np.ndarray) -> np.ndarray:
    """Flip each row so its entry of largest magnitude is positive."""
    rows = np.arange(components.shape[0])
    pivots = np.argmax(np.abs(components), axis=1)
    signs = np.where(components[rows, pivots] < 0, -1.0, 1.0)
    return components * signs[:, None]


def fit_basis(corpus: ImageCorpus, k: int) -> Eigenbasis:
    """
    Compute the mean image and the top-k eigenimages of a corpus.

    Args:
        corpus: At least two shape-equal images
        k: Number of components to keep

    Returns:
        Eigenbasis with f32 components and non-increasing f64 eigenvalues

    Raises:
        CorpusEmptyError: Fewer than two images
        RankError: k outside [1, min(m-1, d)] or above the numerical rank
    """
    m = len(corpus)
    if m < 2:
        raise CorpusEmptyError(f"Basis training needs at least 2 images, got {m}")

    data = corpus.as_matrix()
    d = data.shape[1]
    if not 1 <= k <= min(m - 1, d):
        raise RankError(f"k={k} outside [1, {min(m - 1, d)}] for m={m}, d={d}")

    mean = data.mean(axis=0)
    centered = data - mean

    gram = (centered @ centered.T) / m
    eigenvalues, eigenvectors = np.linalg.eigh(gram)
    eigenvalues = np.clip(eigenvalues[::-1], 0.0, None)
    eigenvectors = eigenvectors[:, ::-1]

    rank = _numerical_rank(eigenvalues, float(np.mean(data * data)), m * max(m, d))
    if k > rank:
        raise RankError(f"k={k} exceeds the numerical rank {rank} of the corpus")

    top = eigenvalues[:k]
    components = (centered.T @ eigenvectors[:, :k]) / np.sqrt(m * top)
    components /= np.linalg.norm(components, axis=0)
    components = _orient(components.T)

    total_variance = float(np.trace(gram))
    logger.info(
        f"Fitted {k} components from {m} images (d={d}, rank {rank}); "
        f"kept {top.sum() / total_variance:.1%} of the variance"
    )

    mean_image = PlanarImage(mean.reshape(corpus[0].data.shape), corpus.space)
    return Eigenbasis(
        mean=mean_image,
        components=components.astype(np.float32),
        eigenvalues=top,
        total_variance=total_variance,
    )


def _check_image(basis: Eigenbasis, img: PlanarImage) -> None:
    if img.shape != basis.shape or img.space is not basis.space:
        raise ShapeError(
            f"Image {img.shape}/{img.space.value} does not match basis "
            f"{basis.shape}/{basis.space.value}"
        )


def project(basis: Eigenbasis, img: PlanarImage) -> ProjectionCoeffs:
    """wⱼ = ⟨I − Ψ₀, Ψⱼ⟩ for every kept component."""
    _check_image(basis, img)
    residual = img.flat() - basis.mean.flat()
    return ProjectionCoeffs(basis.components.astype(np.float64) @ residual)


def reconstruct(basis: Eigenbasis, coeffs: ProjectionCoeffs) -> PlanarImage:
    """Ψ₀ + Σⱼ wⱼ·Ψⱼ, unclamped."""
    if len(coeffs) != basis.k:
        raise ShapeError(f"Got {len(coeffs)} coefficients for a {basis.k}-component basis")
    flat = basis.mean.flat() + coeffs.coeffs @ basis.components.astype(np.float64)
    return basis.mean.with_data(flat)


def pca_reconstruction(basis: Eigenbasis, img: PlanarImage) -> PlanarImage:
    """Best rank-k approximation of an image in the basis."""
    return reconstruct(basis, project(basis, img))

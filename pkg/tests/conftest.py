"""Pytest configuration and fixtures."""

import numpy as np
import pytest
from scipy.special import expit, logit

from eigengs_core.eigenbasis import fit_basis
from eigengs_core.models import (
    ColorSpace,
    EigenGaussianModel,
    GaussianCloud,
    ImageCorpus,
    PlanarImage,
)
from eigengs_core.splat import SIGMA_CUT
from eigengs_core.synthetic import generate_corpus


# Oracles


def naive_render(pos_raw, fac_raw, weights, width, height):
    """Direct per-pixel, per-Gaussian evaluation with the σ cutoff. Returns (K, h, w, C)."""
    pos = np.asarray(pos_raw, dtype=np.float32).astype(np.float64)
    fac = np.asarray(fac_raw, dtype=np.float32).astype(np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    n, k, c = weights.shape
    out = np.zeros((k, height, width, c))
    for g in range(n):
        cx = width * expit(pos[g, 0])
        cy = height * expit(pos[g, 1])
        la, lb, lc = np.exp(fac[g, 0]), fac[g, 1], np.exp(fac[g, 2])
        for y in range(height):
            for x in range(width):
                dx = x + 0.5 - cx
                dy = y + 0.5 - cy
                sigma = 0.5 * ((la * dx + lb * dy) ** 2 + (lc * dy) ** 2)
                if sigma <= SIGMA_CUT:
                    out[:, y, x, :] += weights[g] * np.exp(-sigma)
    return out


def dense_pca(data: np.ndarray, k: int):
    """Top-k eigenpairs of the explicit d×d covariance of an (m, d) matrix."""
    centered = data - data.mean(axis=0)
    covariance = centered.T @ centered / data.shape[0]
    values, vectors = np.linalg.eigh(covariance)
    order = np.argsort(values)[::-1][:k]
    return values[order], vectors[:, order].T


def random_cloud(rng: np.random.Generator, n: int, scale=(1.0, 4.0), margin: float = 0.1) -> GaussianCloud:
    """Random anisotropic Gaussians with scales in pixels."""
    s = rng.uniform(*scale, size=(n, 2))
    fac = np.column_stack([np.log(1.0 / s[:, 0]), rng.normal(0.0, 0.2, size=n), np.log(1.0 / s[:, 1])])
    return GaussianCloud(logit(rng.uniform(margin, 1.0 - margin, size=(n, 2))), fac)


def random_model(
    rng: np.random.Generator,
    n: int = 8,
    k: int = 3,
    channels: int = 1,
    width: int = 16,
    height: int = 16,
    n_low: int = 0,
    k_low: int = 0,
) -> EigenGaussianModel:
    """Eigen-model with random geometry and weights; cross weights zeroed when partitioned."""
    weights = rng.normal(0.0, 0.5, size=(n, k, channels))
    if n_low:
        low_g = np.arange(n) < n_low
        low_k = np.arange(k) < k_low
        weights[low_g[:, None] != low_k[None, :]] = 0.0
    space = ColorSpace.LINEAR if channels == 1 else ColorSpace.YCBCR
    return EigenGaussianModel(random_cloud(rng, n), weights, n_low, k_low, width, height, space)


def random_corpus(rng: np.random.Generator, m: int, width: int, height: int, channels: int = 1) -> ImageCorpus:
    space = ColorSpace.LINEAR if channels == 1 else ColorSpace.RGB
    return ImageCorpus(tuple(PlanarImage(rng.uniform(size=(height, width, channels)), space) for _ in range(m)))


# Fixtures


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded random generator."""
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def toy_corpus() -> ImageCorpus:
    """24 smooth 16×16 YCbCr images."""
    return generate_corpus(24, 16, 16, ColorSpace.YCBCR, seed=7)


@pytest.fixture(scope="session")
def toy_gray_corpus() -> ImageCorpus:
    """24 smooth 16×16 grayscale images."""
    return generate_corpus(24, 16, 16, ColorSpace.LINEAR, seed=11)


@pytest.fixture(scope="session")
def toy_basis(toy_gray_corpus):
    """4-component basis of the grayscale toy corpus."""
    return fit_basis(toy_gray_corpus, 4)


@pytest.fixture
def naive_renderer():
    """Reference renderer: ``naive_renderer(pos_raw, fac_raw, weights, w, h)``."""
    return naive_render


@pytest.fixture
def dense_pca_oracle():
    """Reference PCA: ``dense_pca_oracle(data, k) -> (eigenvalues, components)``."""
    return dense_pca


@pytest.fixture
def cloud_factory():
    """``cloud_factory(rng, n, scale=(lo, hi))`` → random GaussianCloud."""
    return random_cloud


@pytest.fixture
def model_factory():
    """``model_factory(rng, n=, k=, channels=, width=, height=, n_low=, k_low=)``."""
    return random_model


@pytest.fixture
def corpus_factory():
    """``corpus_factory(rng, m, width, height, channels=1)`` → uniform-noise corpus."""
    return random_corpus

"""Unit tests for weight collapse and instant initialization."""

import math

import numpy as np
import pytest

from eigengs_core.eigenbasis import pca_reconstruction
from eigengs_core.errors import ShapeError
from eigengs_core.metrics import psnr
from eigengs_core.models import ColorSpace, Eigenbasis, EigenGaussianModel, PlanarImage, ProjectionCoeffs
from eigengs_core.splat import render_components, render_image
from eigengs_core.synthetic import generate_corpus
from eigengs_core.train import LearningRates, TrainConfig, fit_eigenbasis
from eigengs_core.transform import collapse, init_for_image, random_image_set


def matching_basis(rng: np.random.Generator, model: EigenGaussianModel) -> Eigenbasis:
    """Random orthonormal basis with the model's signature."""
    d = model.width * model.height * model.channels
    q, _ = np.linalg.qr(rng.normal(size=(d, model.k)))
    mean = PlanarImage(rng.uniform(size=(model.height, model.width, model.channels)), model.space)
    return Eigenbasis(mean, q.T, np.sort(rng.uniform(0.1, 1.0, size=model.k))[::-1])


@pytest.mark.unit
class TestCollapse:
    """Tests for folding coefficients into image weights."""

    @pytest.mark.parametrize("seed", range(20))
    def test_two_path_identity(self, seed, model_factory):
        """Test that the collapsed render equals the mean plus weighted component renders."""
        rng = np.random.default_rng(seed)
        k = int(rng.integers(1, 9))
        channels = 3 if seed % 2 else 1
        partitioned = k >= 2 and seed % 3 == 0
        model = model_factory(
            rng, n=int(rng.integers(4, 24)), k=k, channels=channels,
            n_low=2 if partitioned else 0, k_low=1 if partitioned else 0,
        )
        basis = matching_basis(rng, model)
        coeffs = ProjectionCoeffs(rng.normal(0.0, 2.0, size=k))

        collapsed = render_image(collapse(model, coeffs, basis)).data.astype(np.float64)
        components = np.stack([image.data.astype(np.float64) for image in render_components(model)])
        expected = basis.mean.data.astype(np.float64) + np.einsum("k,khwc->hwc", coeffs.coeffs, components)

        assert np.max(np.abs(collapsed - expected)) <= 1e-4

    def test_identity_collapse(self, model_factory, rng):
        """Test that k = 1 with w = 1 copies the reduced weights."""
        model = model_factory(rng, n=7, k=1, channels=3)
        gaussian_set = collapse(model, ProjectionCoeffs(np.array([1.0])), matching_basis(rng, model))
        np.testing.assert_array_equal(gaussian_set.weights, model.weights[:, 0, :])

    def test_linear_in_coefficients(self, model_factory, rng):
        """Test that collapse(αw + βv) = α·collapse(w) + β·collapse(v)."""
        model = model_factory(rng, n=10, k=4, channels=3)
        basis = matching_basis(rng, model)
        w = rng.normal(size=4)
        v = rng.normal(size=4)

        joint = collapse(model, ProjectionCoeffs(0.5 * w - 2.0 * v), basis).weights
        parts = 0.5 * collapse(model, ProjectionCoeffs(w), basis).weights - 2.0 * collapse(
            model, ProjectionCoeffs(v), basis
        ).weights

        np.testing.assert_allclose(joint, parts, rtol=1e-5, atol=1e-6)

    def test_geometry_copied_not_shared(self, model_factory, rng):
        """Test that geometry is bit-identical but independent of the model."""
        model = model_factory(rng, n=5, k=2)
        gaussian_set = collapse(model, ProjectionCoeffs(np.ones(2)), matching_basis(rng, model))

        np.testing.assert_array_equal(gaussian_set.gaussians.pos_raw, model.gaussians.pos_raw)
        np.testing.assert_array_equal(gaussian_set.gaussians.fac_raw, model.gaussians.fac_raw)
        assert not np.shares_memory(gaussian_set.gaussians.pos_raw, model.gaussians.pos_raw)
        assert not np.shares_memory(gaussian_set.gaussians.fac_raw, model.gaussians.fac_raw)

    def test_mean_reference(self, model_factory, rng):
        """Test that the collapsed set renders over the basis mean."""
        model = model_factory(rng, n=5, k=2)
        basis = matching_basis(rng, model)
        assert collapse(model, ProjectionCoeffs(np.zeros(2)), basis).mean_ref is basis.mean

    def test_coefficient_count_mismatch(self, model_factory, rng):
        """Test that the wrong number of coefficients raises ShapeError."""
        model = model_factory(rng, n=5, k=3)
        with pytest.raises(ShapeError):
            collapse(model, ProjectionCoeffs(np.zeros(2)), matching_basis(rng, model))

    def test_basis_mismatch(self, model_factory, rng):
        """Test that a basis of another size raises ShapeError."""
        model = model_factory(rng, n=5, k=2, width=16, height=16)
        other = model_factory(rng, n=5, k=2, width=8, height=8)
        with pytest.raises(ShapeError):
            collapse(model, ProjectionCoeffs(np.zeros(2)), matching_basis(rng, other))


@pytest.mark.unit
class TestInitForImage:
    """Tests for projection followed by collapse."""

    def test_mean_image_is_exact(self, toy_basis, model_factory, rng):
        """Test that initializing from the basis mean reproduces it exactly."""
        model = model_factory(rng, n=12, k=toy_basis.k, width=16, height=16)
        gaussian_set = init_for_image(model, toy_basis, toy_basis.mean)

        assert not gaussian_set.weights.any()
        assert psnr(render_image(gaussian_set), toy_basis.mean) == math.inf

    def test_space_mismatch(self, toy_basis, model_factory, rng):
        """Test that an image in another space raises ShapeError."""
        model = model_factory(rng, n=4, k=toy_basis.k)
        with pytest.raises(ShapeError):
            init_for_image(model, toy_basis, PlanarImage(np.zeros((16, 16, 3)), ColorSpace.RGB))


@pytest.mark.unit
class TestRandomImageSet:
    """Tests for the random-initialization baseline."""

    def test_zero_mean(self):
        """Test that the baseline renders over a zero mean."""
        gaussian_set = random_image_set(10, 12, 9, ColorSpace.YCBCR, seed=1)
        assert gaussian_set.shape == (12, 9, 3)
        assert not gaussian_set.mean_ref.data.any()
        assert len(gaussian_set.gaussians) == 10

    def test_seeded(self):
        """Test that equal seeds give equal sets."""
        first = random_image_set(6, 8, 8, ColorSpace.LINEAR, seed=5)
        second = random_image_set(6, 8, 8, ColorSpace.LINEAR, seed=5)
        np.testing.assert_array_equal(first.weights, second.weights)
        np.testing.assert_array_equal(first.gaussians.pos_raw, second.gaussians.pos_raw)


@pytest.mark.unit
@pytest.mark.slow
class TestToyPipeline:
    """Instant initialization of held-out images against the PCA reconstruction."""

    @pytest.fixture(scope="class")
    def toy_model(self, toy_basis):
        config = TrainConfig(
            n_gaussians=128,
            phase1_iters=300,
            phase2_iters=700,
            init_scale=0.15,
            lrs=LearningRates(pos=5e-3, fac=5e-3, weight=5e-2),
            eval_every=100,
            seed=3,
        )
        model, _ = fit_eigenbasis(toy_basis, config)
        return model

    def test_init_tracks_pca_reconstruction(self, toy_model, toy_basis):
        """Test that the initial render is within 1.5 dB of the rank-k reconstruction."""
        held_out = generate_corpus(3, 16, 16, ColorSpace.LINEAR, seed=101)
        for image in held_out:
            pca_db = psnr(pca_reconstruction(toy_basis, image), image)
            init_db = psnr(render_image(init_for_image(toy_model, toy_basis, image)), image)

            assert abs(init_db - pca_db) <= 1.5

"""Unit tests for eigen-fitting and per-image fine-tuning."""

import numpy as np
import pytest
from pydantic import ValidationError

from eigengs_core.eigenbasis import fit_basis
from eigengs_core.errors import ConfigurationError, ShapeError
from eigengs_core.metrics import psnr, psnr_from_mse
from eigengs_core.models import ColorSpace, ImageGaussianSet, PlanarImage, Subset
from eigengs_core.splat import render_image
from eigengs_core.synthetic import generate_corpus
from eigengs_core.train import LearningRates, TrainConfig, finetune_image, fit_eigenbasis, init_gaussians
from eigengs_core.transform import init_for_image, random_image_set

TOY_LRS = LearningRates(pos=5e-3, fac=5e-3, weight=5e-2)


def toy_config(**overrides) -> TrainConfig:
    values = dict(
        n_gaussians=64,
        phase1_iters=200,
        phase2_iters=300,
        init_scale=0.15,
        lrs=TOY_LRS,
        eval_every=10,
        seed=3,
    )
    values.update(overrides)
    return TrainConfig(**values)


@pytest.fixture(scope="module")
def trained(toy_basis):
    """Frequency-learned toy model and its report."""
    return fit_eigenbasis(toy_basis, toy_config())


@pytest.mark.unit
class TestTrainConfig:
    """Tests for training configuration."""

    def test_defaults(self):
        """Test the documented defaults."""
        cfg = TrainConfig()
        assert cfg.low_fraction == 0.10
        assert cfg.lrs.as_groups() == {"pos_raw": 2e-3, "fac_raw": 2e-3, "weights": 1e-2}
        assert cfg.freq_learning

    def test_default_k_low(self):
        """Test that k = 10 gives k_low = 1."""
        assert TrainConfig().resolved_k_low(10) == 1
        assert TrainConfig().resolved_k_low(11) == 2

    def test_low_set_size(self):
        """Test that 20,000 Gaussians at 10% give 2,000 low-frequency Gaussians."""
        assert TrainConfig(n_gaussians=20_000).n_low() == 2_000

    def test_low_set_kept_non_empty(self):
        """Test that rounding never empties either partition."""
        assert TrainConfig(n_gaussians=3, low_fraction=0.01).n_low() == 1
        assert TrainConfig(n_gaussians=3, low_fraction=0.99).n_low() == 2

    def test_no_partition_without_frequency_learning(self):
        """Test that disabling frequency learning yields an undivided model."""
        cfg = TrainConfig(freq_learning=False)
        assert cfg.n_low() == 0
        assert cfg.resolved_k_low(1) == 0

    @pytest.mark.parametrize("fraction", [0.0, 1.0, -0.2])
    def test_low_fraction_bounds(self, fraction):
        """Test that low_fraction outside (0, 1) is rejected."""
        with pytest.raises(ValidationError):
            TrainConfig(low_fraction=fraction)

    def test_learning_rates_positive(self):
        """Test that a zero learning rate is rejected."""
        with pytest.raises(ValidationError):
            LearningRates(pos=0.0)

    def test_single_gaussian_cannot_be_split(self):
        """Test that frequency learning with one Gaussian is rejected."""
        with pytest.raises(ValidationError):
            TrainConfig(n_gaussians=1)

    def test_single_component_cannot_be_split(self):
        """Test that frequency learning on k = 1 raises ConfigurationError."""
        with pytest.raises(ConfigurationError):
            TrainConfig().resolved_k_low(1)

    def test_k_low_out_of_range(self):
        """Test that k_low ≥ k raises ConfigurationError."""
        with pytest.raises(ConfigurationError):
            TrainConfig(k_low=4).resolved_k_low(4)


@pytest.mark.unit
class TestInitialization:
    """Tests for the eigen-fitting initial state."""

    def test_init_gaussians(self, rng):
        """Test positions inside the margin and isotropic factors of the requested scale."""
        cloud = init_gaussians(50, 100, 60, 0.02, rng)
        means = cloud.means()
        assert np.all((means >= 0.05 - 1e-6) & (means <= 0.95 + 1e-6))
        np.testing.assert_allclose(cloud.fac_raw[:, 0], np.log(1 / 1.2), rtol=1e-6)
        np.testing.assert_array_equal(cloud.fac_raw[:, 0], cloud.fac_raw[:, 2])
        assert not cloud.fac_raw[:, 1].any()

    def test_init_scale_floor(self, rng):
        """Test that tiny canvases start with one-pixel Gaussians."""
        cloud = init_gaussians(4, 16, 16, 0.02, rng)
        np.testing.assert_allclose(cloud.fac_raw[:, 0], 0.0, atol=1e-7)


@pytest.mark.unit
@pytest.mark.slow
class TestFitEigenbasis:
    """Tests for two-phase training on the toy basis."""

    def test_model_layout(self, trained, toy_basis):
        """Test partition sizes and the model's basis signature."""
        model, _ = trained
        assert model.n_gaussians == 64
        assert model.n_low == 6
        assert model.k_low == 1
        assert model.basis_shape == (16, 16, 1, 4)
        assert model.space is toy_basis.space

    def test_cross_weights_exactly_zero(self, trained):
        """Test that no Gaussian carries weight for the other partition's components."""
        model, _ = trained
        assert not model.weights[model.cross_mask()].any()

    def test_component_error_reduced(self, trained):
        """Test that training cuts the component error below a quarter of its start."""
        _, report = trained
        assert report.last.loss < 0.25 * report.first.loss

    def test_report_iterations(self, trained):
        """Test that phase-2 rows continue the phase-1 iteration count."""
        _, report = trained
        np.testing.assert_array_equal(report.column("iteration"), np.arange(0, 501, 10))

    def test_report_psnr_matches_loss(self, trained):
        """Test that each row's PSNR is derived from its loss."""
        _, report = trained
        for row in report:
            assert row.psnr_db == pytest.approx(psnr_from_mse(row.loss))

    def test_loss_windows(self, trained):
        """Test that the loss never rises across a 50-iteration window."""
        _, report = trained
        losses = report.column("loss")
        for start in range(len(losses) - 5):
            assert losses[start + 5] <= losses[start] * 1.05

    def test_bit_reproducible(self, trained, toy_basis):
        """Test that the same seed and config give identical parameters."""
        model, _ = trained
        again, _ = fit_eigenbasis(toy_basis, toy_config())
        np.testing.assert_array_equal(again.gaussians.pos_raw, model.gaussians.pos_raw)
        np.testing.assert_array_equal(again.gaussians.fac_raw, model.gaussians.fac_raw)
        np.testing.assert_array_equal(again.weights, model.weights)

    def test_phase_two_leaves_low_set_alone(self, trained, toy_basis):
        """Test that the low set after phase 2 equals the low set after phase 1."""
        model, _ = trained
        phase_one_only, _ = fit_eigenbasis(toy_basis, toy_config(phase2_iters=0))
        low = model.partition_slice(Subset.LOW_ONLY)
        np.testing.assert_array_equal(model.gaussians.pos_raw[low], phase_one_only.gaussians.pos_raw[low])
        np.testing.assert_array_equal(model.gaussians.fac_raw[low], phase_one_only.gaussians.fac_raw[low])
        np.testing.assert_array_equal(model.weights[low], phase_one_only.weights[low])

    def test_single_phase(self, toy_basis):
        """Test that without frequency learning one phase runs both budgets."""
        model, report = fit_eigenbasis(
            toy_basis, toy_config(freq_learning=False, phase1_iters=20, phase2_iters=20)
        )
        assert model.n_low == 0
        assert not model.freq_learning
        assert report.last.iteration == 40
        assert report.last.loss < report.first.loss

    def test_rejects_unsplittable_basis(self, toy_gray_corpus):
        """Test that frequency learning on a one-component basis raises ConfigurationError."""
        with pytest.raises(ConfigurationError):
            fit_eigenbasis(fit_basis(toy_gray_corpus, 1), toy_config())


@pytest.mark.unit
@pytest.mark.slow
class TestFinetune:
    """Tests for per-image refinement."""

    def test_zero_iterations(self, trained, toy_basis, toy_gray_corpus):
        """Test that iters = 0 returns the start set and a single row."""
        model, _ = trained
        start = init_for_image(model, toy_basis, toy_gray_corpus[0])

        refined, report = finetune_image(start, toy_gray_corpus[0], 0)

        assert len(report) == 1
        assert report.first.iteration == 0
        np.testing.assert_array_equal(refined.weights, start.weights)
        np.testing.assert_array_equal(refined.gaussians.pos_raw, start.gaussians.pos_raw)

    def test_target_equal_to_render_is_stationary(self, cloud_factory, rng):
        """Test that a target equal to the render leaves parameters in place."""
        mean = PlanarImage(rng.uniform(size=(16, 16, 3)), ColorSpace.RGB)
        start = ImageGaussianSet(cloud_factory(rng, 6), rng.normal(0.0, 0.1, size=(6, 3)), mean)

        refined, report = finetune_image(start, render_image(start), 20, eval_every=5)

        np.testing.assert_allclose(refined.weights, start.weights, atol=1e-7)
        np.testing.assert_allclose(refined.gaussians.pos_raw, start.gaussians.pos_raw, atol=1e-7)
        np.testing.assert_allclose(refined.gaussians.fac_raw, start.gaussians.fac_raw, atol=1e-7)
        assert report.column("iteration").tolist() == [0, 5, 10, 15, 20]

    def test_random_start_improves(self):
        """Test that 200 iterations from random Gaussians raise the PSNR."""
        target = generate_corpus(1, 16, 16, ColorSpace.RGB, seed=21)[0]
        start = random_image_set(48, 16, 16, ColorSpace.RGB, seed=4, init_scale=0.15)

        refined, report = finetune_image(start, target, 200, lrs=TOY_LRS)

        assert report.last.psnr_db > report.first.psnr_db
        assert psnr(render_image(refined), target) == pytest.approx(report.last.psnr_db)

    def test_snapshots(self, trained, toy_basis, toy_gray_corpus):
        """Test that snapshots fire at requested iterations and at the end."""
        model, _ = trained
        start = init_for_image(model, toy_basis, toy_gray_corpus[1])
        seen = []

        finetune_image(
            start, toy_gray_corpus[1], 12, eval_every=50,
            snapshot_iters=(0, 5, 40), on_snapshot=lambda t, image: seen.append(t),
        )

        assert seen == [0, 5, 12]

    def test_report_sampling(self, trained, toy_basis, toy_gray_corpus):
        """Test rows at 0, every eval_every iterations and the final iteration."""
        model, _ = trained
        start = init_for_image(model, toy_basis, toy_gray_corpus[2])
        _, report = finetune_image(start, toy_gray_corpus[2], 23, eval_every=10)
        assert report.column("iteration").tolist() == [0, 10, 20, 23]

    def test_shape_mismatch(self, trained, toy_basis):
        """Test that a target of another size raises ShapeError."""
        model, _ = trained
        start = init_for_image(model, toy_basis, toy_basis.mean)
        with pytest.raises(ShapeError):
            finetune_image(start, PlanarImage(np.zeros((8, 8, 1)), ColorSpace.LINEAR), 1)

    def test_negative_iterations(self, trained, toy_basis):
        """Test that a negative budget raises ValueError."""
        model, _ = trained
        start = init_for_image(model, toy_basis, toy_basis.mean)
        with pytest.raises(ValueError):
            finetune_image(start, toy_basis.mean, -1)

"""
Fitting shared Gaussians to a truncated eigenbasis.

With frequency learning the Gaussians are split in two sets trained one after
the other: a small low-frequency set against the leading components, then the
remaining Gaussians against the rest while the first set stays frozen. Each
phase optimizes only its own block of the weight tensor, so cross-partition
weights are never touched and stay exactly zero.

Eigenimages are unit-norm over d samples, i.e. tiny per pixel. Targets are
scaled by sqrt(d) to unit RMS for optimization and the trained weights are
scaled back before they are stored.
"""

import logging
import math
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import logit

from eigengs_core.grad.backward import components_objective
from eigengs_core.metrics import component_ssim, psnr_from_mse
from eigengs_core.models import Eigenbasis, EigenGaussianModel, FitReport, GaussianCloud
from eigengs_core.train.adam import AdamState, adam_step
from eigengs_core.train.config import LearningRates, TrainConfig

logger = logging.getLogger(__name__)

INIT_MARGIN = 0.05
INIT_WEIGHT_STD = 0.01
MIN_INIT_SCALE_PX = 1.0


def init_gaussians(
    n: int,
    width: int,
    height: int,
    init_scale: float,
    rng: np.random.Generator,
) -> GaussianCloud:
    """
    Isotropic Gaussians at uniform random positions inside the image margin.

    The scale is ``max(init_scale·min(w, h), 1)`` pixels.
    """
    positions = rng.uniform(INIT_MARGIN, 1.0 - INIT_MARGIN, size=(n, 2))
    scale = max(init_scale * min(width, height), MIN_INIT_SCALE_PX)
    fac = np.zeros((n, 3))
    fac[:, 0] = fac[:, 2] = math.log(1.0 / scale)
    return GaussianCloud(logit(positions), fac)


def init_weights(n: int, k: int, channels: int, rng: np.random.Generator) -> np.ndarray:
    return rng.normal(0.0, INIT_WEIGHT_STD, size=(n, k, channels)).astype(np.float32)


@dataclass
class _Progress:
    """Shared bookkeeping for the report across phases."""

    report: FitReport
    targets: np.ndarray
    prediction: np.ndarray
    started: float
    eval_every: int

    @property
    def total(self) -> int:
        return self.targets.size

    def record(self, iteration: int) -> None:
        residual = self.prediction - self.targets
        loss = float(np.mean(residual * residual))
        score = component_ssim(self.prediction, self.targets)
        self.report.record(iteration, loss, psnr_from_mse(loss), score, time.perf_counter() - self.started)
        logger.debug(f"iter {iteration}: loss {loss:.6g}")


def _fit_partition(
    cloud: GaussianCloud,
    weights: np.ndarray,
    components: slice,
    iters: int,
    lrs: LearningRates,
    progress: _Progress,
    iteration_offset: int,
    record_start: bool,
    width: int,
    height: int,
) -> tuple[GaussianCloud, np.ndarray]:
    """Adam on one partition against ``targets[components]``."""
    params = {"pos_raw": cloud.pos_raw.copy(), "fac_raw": cloud.fac_raw.copy(), "weights": weights.copy()}
    state = AdamState.for_params(params)
    groups = lrs.as_groups()
    targets = progress.targets[components]

    for t in range(iters + 1):
        last = t == iters
        result = components_objective(
            params["pos_raw"], params["fac_raw"], params["weights"], targets,
            width, height, with_grads=not last,
        )
        progress.prediction[components] = result.prediction

        if (t % progress.eval_every == 0 or last) and (t > 0 or record_start):
            progress.record(iteration_offset + t)
        if last:
            break

        grads = {"pos_raw": result.d_pos_raw, "fac_raw": result.d_fac_raw, "weights": result.d_weights}
        params, state = adam_step(params, grads, state, groups)

    return GaussianCloud(params["pos_raw"], params["fac_raw"]), params["weights"]


def fit_eigenbasis(
    basis: Eigenbasis, cfg: TrainConfig
) -> tuple[EigenGaussianModel, FitReport]:
    """
    Train an eigen-model for a basis.

    Args:
        basis: Truncated eigenbasis to approximate
        cfg: Gaussian count, partition, learning rates, iteration budgets, seed

    Returns:
        (model, report); report loss is the MSE over all components of the
        unit-RMS targets, so phase-1 rows count the untouched high components
        at their full energy

    Raises:
        ConfigurationError: Frequency learning requested on a basis it cannot split
    """
    rng = np.random.default_rng(cfg.seed)
    width, height, channels = basis.shape
    k = basis.k
    norm = math.sqrt(basis.d)

    targets = basis.component_array() * norm
    progress = _Progress(
        report=FitReport(),
        targets=targets,
        prediction=np.zeros_like(targets),
        started=time.perf_counter(),
        eval_every=cfg.eval_every,
    )

    n_total = cfg.n_gaussians
    n_low = cfg.n_low()
    k_low = cfg.resolved_k_low(k)
    weights = np.zeros((n_total, k, channels), dtype=np.float32)

    if n_low == 0:
        iters = cfg.phase1_iters + cfg.phase2_iters
        logger.info(f"Fitting {n_total} Gaussians to {k} components for {iters} iterations")
        cloud = init_gaussians(n_total, width, height, cfg.init_scale, rng)
        cloud, trained = _fit_partition(
            cloud, init_weights(n_total, k, channels, rng), slice(0, k), iters,
            cfg.lrs, progress, 0, True, width, height,
        )
        weights[:] = trained
    else:
        logger.info(
            f"Phase 1: {n_low} low-frequency Gaussians on components [0, {k_low}) "
            f"for {cfg.phase1_iters} iterations"
        )
        low = init_gaussians(n_low, width, height, cfg.init_scale, rng)
        low, low_weights = _fit_partition(
            low, init_weights(n_low, k_low, channels, rng), slice(0, k_low), cfg.phase1_iters,
            cfg.lrs, progress, 0, True, width, height,
        )

        n_high = n_total - n_low
        logger.info(
            f"Phase 2: {n_high} high-frequency Gaussians on components [{k_low}, {k}) "
            f"for {cfg.phase2_iters} iterations"
        )
        high = init_gaussians(n_high, width, height, cfg.init_scale, rng)
        high, high_weights = _fit_partition(
            high, init_weights(n_high, k - k_low, channels, rng), slice(k_low, k), cfg.phase2_iters,
            cfg.lrs, progress, cfg.phase1_iters, False, width, height,
        )

        cloud = low.concat(high)
        weights[:n_low, :k_low] = low_weights
        weights[n_low:, k_low:] = high_weights

    weights = (weights.astype(np.float64) / norm).astype(np.float32)
    model = EigenGaussianModel(
        gaussians=cloud,
        weights=weights,
        n_low=n_low,
        k_low=k_low,
        width=width,
        height=height,
        space=basis.space,
    )

    if len(progress.report):
        last = progress.report.last
        logger.info(
            f"Eigen-fit done: loss {last.loss:.5g} ({last.psnr_db:.2f} dB) after "
            f"{last.iteration} iterations in {last.seconds:.1f}s"
        )
    return model, progress.report


def component_mse(model: EigenGaussianModel, basis: Eigenbasis, targets: Optional[np.ndarray] = None) -> float:
    """Mean squared error between the model's component renders and the eigenimages."""
    targets = basis.component_array() if targets is None else targets
    result = components_objective(
        model.gaussians.pos_raw, model.gaussians.fac_raw, model.weights, targets,
        model.width, model.height, with_grads=False,
    )
    return result.loss

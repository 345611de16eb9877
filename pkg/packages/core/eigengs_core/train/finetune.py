"""Per-image refinement of a collapsed (or random) Gaussian set."""

import logging
import time
from typing import Callable, Iterable, Optional

from eigengs_core.errors import ShapeError
from eigengs_core.grad.backward import image_objective
from eigengs_core.metrics import psnr, ssim
from eigengs_core.models import FitReport, ImageGaussianSet, PlanarImage
from eigengs_core.train.adam import AdamState, adam_step
from eigengs_core.train.config import LearningRates

logger = logging.getLogger(__name__)

SnapshotCallback = Callable[[int, PlanarImage], None]


def finetune_image(
    gaussian_set: ImageGaussianSet,
    target: PlanarImage,
    iters: int,
    lrs: Optional[LearningRates] = None,
    eval_every: int = 50,
    snapshot_iters: Iterable[int] = (),
    on_snapshot: Optional[SnapshotCallback] = None,
) -> tuple[ImageGaussianSet, FitReport]:
    """
    Optimize positions, factors and collapsed weights against one image.

    The report samples iteration 0, every ``eval_every`` iterations and the
    final iteration. ``on_snapshot`` receives the render at every iteration in
    ``snapshot_iters`` and at the final iteration.

    Args:
        gaussian_set: Starting set, left unmodified
        target: Image to reconstruct
        iters: Adam steps
        lrs: Learning rates (defaults if omitted)
        eval_every: Report sampling interval
        snapshot_iters: Iterations whose render is handed to ``on_snapshot``
        on_snapshot: Callback for intermediate renders

    Returns:
        (refined set, report)
    """
    if target.shape != gaussian_set.shape or target.space is not gaussian_set.space:
        raise ShapeError(
            f"Target {target.shape}/{target.space.value} does not match set "
            f"{gaussian_set.shape}/{gaussian_set.space.value}"
        )
    if iters < 0 or eval_every < 1:
        raise ValueError(f"iters must be >= 0 and eval_every >= 1, got {iters}, {eval_every}")

    lrs = lrs or LearningRates()
    groups = lrs.as_groups()
    snapshots = {t for t in snapshot_iters if 0 <= t <= iters} | {iters}

    params = {
        "pos_raw": gaussian_set.gaussians.pos_raw.copy(),
        "fac_raw": gaussian_set.gaussians.fac_raw.copy(),
        "weights": gaussian_set.weights.copy(),
    }
    state = AdamState.for_params(params)
    report = FitReport()
    started = time.perf_counter()

    for t in range(iters + 1):
        last = t == iters
        result = image_objective(
            params["pos_raw"], params["fac_raw"], params["weights"],
            gaussian_set.mean_ref.data, target.data,
            gaussian_set.width, gaussian_set.height, with_grads=not last,
        )

        sample = t % eval_every == 0 or last
        if sample or (on_snapshot is not None and t in snapshots):
            rendered = PlanarImage(result.prediction, target.space)
            if sample:
                report.record(t, result.loss, psnr(rendered, target), ssim(rendered, target), time.perf_counter() - started)
                logger.debug(f"iter {t}: loss {result.loss:.6g}, {report.last.psnr_db:.2f} dB")
            if on_snapshot is not None and t in snapshots:
                on_snapshot(t, rendered)
        if last:
            break

        grads = {"pos_raw": result.d_pos_raw, "fac_raw": result.d_fac_raw, "weights": result.d_weights}
        params, state = adam_step(params, grads, state, groups)

    return gaussian_set.with_params(params["pos_raw"], params["fac_raw"], params["weights"]), report

"""
Per-image initialization and fine-tuning against a trained model.

Images are independent, so a batch can be spread over worker processes; each
worker loads the model once and keeps its tile kernels single-threaded.
"""

import enum
import logging
import multiprocessing
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from eigengs_core.config import configure_threads
from eigengs_core.eigenbasis import pca_reconstruction
from eigengs_core.imagecore import load_image, save_png
from eigengs_core.metrics import psnr
from eigengs_core.models import PlanarImage
from eigengs_core.splat import render_image
from eigengs_core.storage import ModelBundle, load_model, write_report, write_rows
from eigengs_core.train import LearningRates, finetune_image
from eigengs_core.transform import init_for_image, random_image_set

logger = logging.getLogger(__name__)

SUMMARY_COLUMNS = ("image", "pca_psnr_db", "init_psnr_db", "final_psnr_db", "status")
DEFAULT_SAVE_ITERS = (0, 10, 100, 1000)

# Loaded once per worker process by _init_worker.
_worker_bundle: Optional[ModelBundle] = None


class InitMode(str, enum.Enum):
    """Where fine-tuning starts."""

    EIGEN = "eigen"  # collapse of the image's projection
    RANDOM = "random"  # random Gaussians over a zero mean


@dataclass(frozen=True)
class FitOptions:
    out_dir: Path
    iters: int = 1000
    eval_every: int = 50
    save_iters: tuple[int, ...] = DEFAULT_SAVE_ITERS
    init: InitMode = InitMode.EIGEN
    resize: bool = False
    lrs: LearningRates = field(default_factory=LearningRates)
    seed: int = 0


@dataclass(frozen=True)
class FitOutcome:
    """Result of one image; ``status`` is ``ok`` or ``failed``."""

    image: str
    status: str
    pca_psnr_db: float = float("nan")
    init_psnr_db: float = float("nan")
    final_psnr_db: float = float("nan")
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def as_row(self) -> tuple:
        return (self.image, self.pca_psnr_db, self.init_psnr_db, self.final_psnr_db, self.status)


def snapshot_path(out_dir: Path, stem: str, iteration: int) -> Path:
    return out_dir / f"{stem}_iter{iteration:05d}.png"


def fit_image(bundle: ModelBundle, path: Path, options: FitOptions) -> FitOutcome:
    """
    Initialize, fine-tune and write outputs for one image.

    Failures are logged and returned as a failed outcome so the batch continues.
    """
    basis, model = bundle.basis, bundle.model
    stem = path.stem
    try:
        target_size = (basis.width, basis.height) if options.resize else None
        target = load_image(path, basis.space, target_size)

        pca_psnr = psnr(pca_reconstruction(basis, target), target)
        if options.init is InitMode.EIGEN:
            start = init_for_image(model, basis, target)
        else:
            start = random_image_set(
                model.n_gaussians, target.width, target.height, target.space,
                seed=options.seed, channels=target.channels,
            )
        init_psnr = psnr(render_image(start), target)

        def on_snapshot(t: int, rendered: PlanarImage) -> None:
            save_png(rendered, snapshot_path(options.out_dir, stem, t))

        _, report = finetune_image(
            start, target, options.iters, options.lrs, options.eval_every,
            snapshot_iters=options.save_iters, on_snapshot=on_snapshot,
        )
        write_report(report, options.out_dir / f"{stem}.csv")

        final_psnr = report.last.psnr_db
        logger.info(
            f"{path.name}: PCA {pca_psnr:.2f} dB, init {init_psnr:.2f} dB, "
            f"final {final_psnr:.2f} dB after {options.iters} iterations"
        )
        return FitOutcome(stem, "ok", pca_psnr, init_psnr, final_psnr)
    except Exception as e:
        logger.error(f"Failed to fit {path}: {e}", exc_info=True)
        return FitOutcome(stem, "failed", error=str(e))


def _init_worker(model_path: str) -> None:
    global _worker_bundle
    configure_threads(1)
    _worker_bundle = load_model(model_path)


def _fit_in_worker(path: Path, options: FitOptions) -> FitOutcome:
    return fit_image(_worker_bundle, path, options)


class FitService:
    """Fits a batch of images against one model file."""

    def __init__(self, model_path: Path, options: FitOptions, workers: int = 1):
        self.model_path = Path(model_path)
        self.options = options
        self.workers = max(1, workers)

    def run(self, images: list[Path]) -> list[FitOutcome]:
        """
        Fit every image and write ``summary.csv`` into the output directory.

        Returns:
            Outcomes in input order
        """
        self.options.out_dir.mkdir(parents=True, exist_ok=True)
        logger.info(f"Fitting {len(images)} images with {self.workers} worker(s)")

        if self.workers == 1 or len(images) < 2:
            bundle = load_model(self.model_path)
            outcomes = [fit_image(bundle, path, self.options) for path in images]
        else:
            # Numba's thread pool does not survive fork; start workers fresh.
            context = multiprocessing.get_context("spawn")
            with ProcessPoolExecutor(
                max_workers=min(self.workers, len(images)),
                mp_context=context,
                initializer=_init_worker,
                initargs=(str(self.model_path),),
            ) as pool:
                outcomes = list(pool.map(_fit_in_worker, images, [self.options] * len(images)))

        write_rows(self.options.out_dir / "summary.csv", SUMMARY_COLUMNS, (o.as_row() for o in outcomes))
        failed = sum(not o.ok for o in outcomes)
        if failed:
            logger.warning(f"{failed} of {len(outcomes)} images failed")
        return outcomes

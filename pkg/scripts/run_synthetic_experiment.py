#!/usr/bin/env python3
"""
Desk-scale experiment on a generated corpus of smooth blobs over gradients.

Trains one model with frequency learning and one without, then checks that
  * the instant initialization lands close to the PCA reconstruction,
  * fine-tuning improves on it with a (nearly) non-decreasing PSNR curve,
  * the low-frequency set ends up with much larger Gaussians than the rest.

Usage:
    # Full run (64×64, 200 training images, k=30, 1,000 Gaussians)
    python scripts/run_synthetic_experiment.py --out-dir runs/synthetic

    # Quick smoke run
    python scripts/run_synthetic_experiment.py --train-count 40 --held-out 4 \\
        --components 8 --gaussians 200 --iters1 200 --iters2 200 --finetune-iters 100
"""

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from eigengs_core.config import configure_threads
from eigengs_core.eigenbasis import fit_basis, pca_reconstruction
from eigengs_core.metrics import psnr
from eigengs_core.models import ColorSpace, Subset
from eigengs_core.splat import radius_summary, render_image
from eigengs_core.storage import save_model, write_report, write_rows
from eigengs_core.synthetic import generate_corpus
from eigengs_core.train import LearningRates, TrainConfig, finetune_image, fit_eigenbasis
from eigengs_core.transform import init_for_image

logging.basicConfig(
    level=logging.INFO,
    format="[%(asctime)s] %(levelname)s - %(message)s",
)
logger = logging.getLogger(__name__)

INIT_GAP_DB = 1.5
FINETUNE_GAIN_DB = 3.0
CURVE_SLACK_DB = 0.3
LOW_HIGH_MEDIAN_RATIO = 2.0


def train(basis, args, freq_learning: bool):
    config = TrainConfig(
        n_gaussians=args.gaussians,
        phase1_iters=args.iters1,
        phase2_iters=args.iters2,
        freq_learning=freq_learning,
        seed=args.seed,
        eval_every=50,
    )
    label = "FL" if freq_learning else "no FL"
    logger.info(f"Training {label} model: {args.gaussians} Gaussians, {args.iters1}+{args.iters2} iterations")
    model, report = fit_eigenbasis(basis, config)
    logger.info(f"  final component PSNR {report.last.psnr_db:.2f} dB")
    return model, report


def held_out_study(model, basis, held_out, args):
    """
    Initialize and fine-tune every held-out image.

    Returns:
        (per-image rows, PSNR curves stacked as images × samples)
    """
    rows, curves = [], []
    for i, image in enumerate(held_out):
        pca_db = psnr(pca_reconstruction(basis, image), image)
        start = init_for_image(model, basis, image)
        init_db = psnr(render_image(start), image)
        _, report = finetune_image(start, image, args.finetune_iters, LearningRates(), eval_every=50)
        if args.out_dir is not None:
            write_report(report, args.out_dir / "held_out" / f"image_{i:03d}.csv")

        curve = report.column("psnr_db")
        rows.append((i, pca_db, init_db, float(curve[-1])))
        curves.append(curve)
        logger.info(f"  image {i}: PCA {pca_db:.2f} dB, init {init_db:.2f} dB, final {curve[-1]:.2f} dB")
    return rows, np.vstack(curves)


def main() -> int:
    parser = argparse.ArgumentParser(description="Run the synthetic-corpus experiment")
    parser.add_argument("--width", type=int, default=64)
    parser.add_argument("--height", type=int, default=64)
    parser.add_argument("--train-count", type=int, default=200)
    parser.add_argument("--held-out", type=int, default=20)
    parser.add_argument("--components", type=int, default=30)
    parser.add_argument("--gaussians", type=int, default=1000)
    parser.add_argument("--iters1", type=int, default=1500)
    parser.add_argument("--iters2", type=int, default=1500)
    parser.add_argument("--finetune-iters", type=int, default=500)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--threads", type=int, default=None)
    parser.add_argument("--out-dir", type=Path, default=None, help="Write models and reports here")
    args = parser.parse_args()

    configure_threads(args.threads)

    corpus = generate_corpus(args.train_count, args.width, args.height, ColorSpace.YCBCR, seed=args.seed)
    held_out = generate_corpus(args.held_out, args.width, args.height, ColorSpace.YCBCR, seed=args.seed + 1)
    basis = fit_basis(corpus, args.components)
    logger.info(
        f"Basis: k={basis.k}, {basis.explained_variance_ratio().sum():.1%} of corpus variance kept"
    )

    fl_model, fl_report = train(basis, args, freq_learning=True)
    plain_model, plain_report = train(basis, args, freq_learning=False)
    if args.out_dir is not None:
        save_model(args.out_dir / "fl.egs1", basis, fl_model)
        save_model(args.out_dir / "no_fl.egs1", basis, plain_model)
        write_report(fl_report, args.out_dir / "fl_train.csv")
        write_report(plain_report, args.out_dir / "no_fl_train.csv")

    logger.info(f"Fitting {len(held_out)} held-out images with the FL model")
    rows, curves = held_out_study(fl_model, basis, held_out, args)
    if args.out_dir is not None:
        write_rows(
            args.out_dir / "held_out_summary.csv",
            ("image", "pca_psnr_db", "init_psnr_db", "final_psnr_db"),
            rows,
        )

    pca_db = np.array([r[1] for r in rows])
    init_db = np.array([r[2] for r in rows])
    init_gap = float(np.mean(np.abs(init_db - pca_db)))

    mean_curve = curves.mean(axis=0)
    gain = float(mean_curve[-1] - mean_curve[0])
    worst_drop = float(np.max(mean_curve[:-1] - mean_curve[1:], initial=0.0))

    fl_radii = radius_summary(fl_model)
    median_ratio = fl_radii[Subset.LOW_ONLY.value]["median"] / fl_radii[Subset.HIGH_ONLY.value]["median"]
    plain_all = radius_summary(plain_model)[Subset.ALL.value]
    spread_ratio = plain_all["p90"] / plain_all["p10"]

    checks = [
        (f"init vs PCA gap {init_gap:.2f} dB <= {INIT_GAP_DB}", init_gap <= INIT_GAP_DB),
        (f"fine-tune gain {gain:.2f} dB >= {FINETUNE_GAIN_DB}", gain >= FINETUNE_GAIN_DB),
        (f"largest curve drop {worst_drop:.3f} dB <= {CURVE_SLACK_DB}", worst_drop <= CURVE_SLACK_DB),
        (
            f"low/high median radius ratio {median_ratio:.2f} >= {LOW_HIGH_MEDIAN_RATIO}",
            median_ratio >= LOW_HIGH_MEDIAN_RATIO,
        ),
        (
            f"no-FL p90/p10 radius ratio {spread_ratio:.2f} < FL median ratio {median_ratio:.2f}",
            spread_ratio < median_ratio,
        ),
    ]

    failed = 0
    for description, ok in checks:
        if ok:
            logger.info(f"PASS {description}")
        else:
            logger.error(f"FAIL {description}")
            failed += 1

    if failed:
        logger.error(f"{failed} of {len(checks)} checks failed")
        return 1
    logger.info("All checks passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())

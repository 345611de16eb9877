"""Corpus → eigenbasis → eigen-model → EGS1 file."""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from eigengs_core.eigenbasis import fit_basis
from eigengs_core.imagecore import load_corpus
from eigengs_core.models import ColorSpace, Eigenbasis, EigenGaussianModel, FitReport
from eigengs_core.storage import save_model, write_report
from eigengs_core.train import TrainConfig, fit_eigenbasis

logger = logging.getLogger(__name__)


@dataclass
class TrainingResult:
    basis: Eigenbasis
    model: EigenGaussianModel
    report: FitReport
    model_path: Path
    report_path: Path


def default_report_path(model_path: Path) -> Path:
    """``model.egs1`` → ``model_train.csv`` next to it."""
    return model_path.with_name(f"{model_path.stem}_train.csv")


class TrainingService:
    """Runs basis fitting and eigen-model training for one corpus."""

    def __init__(self, config: TrainConfig):
        self.config = config

    def run(
        self,
        corpus_dir: Path,
        width: int,
        height: int,
        components: int,
        space: ColorSpace,
        out: Path,
        report_path: Optional[Path] = None,
    ) -> TrainingResult:
        """
        Train and persist a model.

        Args:
            corpus_dir: Directory of PNGs
            width: Target width every image is resized to
            height: Target height
            components: Basis size k
            space: Working color space
            out: EGS1 output path
            report_path: Training CSV (default ``<out stem>_train.csv``)

        Returns:
            TrainingResult with the in-memory objects and written paths
        """
        corpus = load_corpus(corpus_dir, (width, height), space)
        basis = fit_basis(corpus, components)
        model, report = fit_eigenbasis(basis, self.config)

        model_path = save_model(out, basis, model)
        report_path = write_report(report, report_path or default_report_path(Path(out)))
        logger.info(f"Training report written to {report_path}")

        return TrainingResult(basis, model, report, model_path, report_path)

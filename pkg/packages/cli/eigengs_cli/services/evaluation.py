"""Aggregation of fit reports and Gaussian-size histograms."""

import glob
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from eigengs_core.models import EigenGaussianModel, FitReport, Subset
from eigengs_core.splat import gaussian_radii

logger = logging.getLogger(__name__)

AGGREGATE_COLUMNS = (
    "iteration",
    "count",
    "psnr_mean",
    "psnr_std",
    "ssim_mean",
    "ssim_std",
    "pct_above_threshold",
)
HISTOGRAM_COLUMNS = ("partition", "bin_lo", "bin_hi", "count")


@dataclass(frozen=True)
class AggregateRow:
    """Statistics over every report that sampled one iteration (population std)."""

    iteration: int
    count: int
    psnr_mean: float
    psnr_std: float
    ssim_mean: float
    ssim_std: float
    pct_above_threshold: float

    def as_row(self) -> tuple:
        return (
            self.iteration,
            self.count,
            self.psnr_mean,
            self.psnr_std,
            self.ssim_mean,
            self.ssim_std,
            self.pct_above_threshold,
        )


def find_reports(pattern: str) -> list[Path]:
    """Report CSVs matching a glob (``**`` allowed), sorted by path."""
    return sorted(Path(p) for p in glob.glob(pattern, recursive=True) if Path(p).is_file())


def _mean_std(values: np.ndarray) -> tuple[float, float]:
    if np.isinf(values).any():
        # Identical reconstructions report infinite PSNR.
        return float(np.mean(values)), float("nan")
    return float(np.mean(values)), float(np.std(values))


def aggregate_reports(reports: Sequence[FitReport], threshold_db: float) -> list[AggregateRow]:
    """
    Mean ± std of PSNR/SSIM per sampled iteration across reports.

    ``pct_above_threshold`` is the share of reports at that iteration whose
    PSNR is strictly above ``threshold_db``.
    """
    by_iteration: dict[int, list] = {}
    for report in reports:
        for row in report:
            by_iteration.setdefault(row.iteration, []).append(row)

    rows = []
    for iteration in sorted(by_iteration):
        samples = by_iteration[iteration]
        psnrs = np.array([r.psnr_db for r in samples], dtype=np.float64)
        ssims = np.array([r.ssim for r in samples], dtype=np.float64)
        psnr_mean, psnr_std = _mean_std(psnrs)
        ssim_mean, ssim_std = _mean_std(ssims)
        rows.append(
            AggregateRow(
                iteration=iteration,
                count=len(samples),
                psnr_mean=psnr_mean,
                psnr_std=psnr_std,
                ssim_mean=ssim_mean,
                ssim_std=ssim_std,
                pct_above_threshold=100.0 * float(np.count_nonzero(psnrs > threshold_db)) / len(samples),
            )
        )
    return rows


def radius_histogram(
    model: EigenGaussianModel, bins: int, max_radius: Optional[float] = None
) -> list[tuple[str, float, float, int]]:
    """
    Radius histogram per partition over [0, max_radius].

    Models without frequency learning get one ``all`` partition; otherwise the
    ``low`` and ``high`` sets are binned separately on shared edges.
    Radii above ``max_radius`` land in the last bin.
    """
    if bins < 1:
        raise ValueError(f"bins must be >= 1, got {bins}")

    radii = gaussian_radii(model).astype(np.float64)
    upper = float(max_radius) if max_radius is not None else float(radii.max(initial=0.0))
    if upper <= 0:
        upper = 1.0
    edges = np.linspace(0.0, upper, bins + 1)

    if model.freq_learning:
        partitions = [Subset.LOW_ONLY, Subset.HIGH_ONLY]
    else:
        partitions = [Subset.ALL]

    rows = []
    for subset in partitions:
        values = np.minimum(radii[model.partition_slice(subset)], upper)
        counts, _ = np.histogram(values, bins=edges)
        for lo, hi, count in zip(edges[:-1], edges[1:], counts):
            rows.append((subset.value, float(lo), float(hi), int(count)))
    return rows

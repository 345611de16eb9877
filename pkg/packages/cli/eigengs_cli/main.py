"""
EigenGS batch CLI.

Exit codes: 0 success, 1 runtime failure, 2 usage or validation error.
"""

import enum
import logging
import logging.config
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, List, Optional

import numpy as np
import typer
from pydantic import ValidationError
from rich.console import Console
from rich.table import Table

from eigengs_core.config import configure_threads, settings
from eigengs_core.errors import ConfigurationError, EigenGSError
from eigengs_core.imagecore import save_png
from eigengs_core.models import ColorSpace, PlanarImage
from eigengs_core.splat import radius_summary, render_components
from eigengs_core.storage import load_model, read_report, write_curve_svg, write_rows
from eigengs_core.synthetic import write_corpus
from eigengs_core.train import LearningRates, TrainConfig

from eigengs_cli.services import (
    AGGREGATE_COLUMNS,
    HISTOGRAM_COLUMNS,
    FitOptions,
    FitService,
    InitMode,
    TrainingService,
    aggregate_reports,
    find_reports,
    radius_histogram,
)
from eigengs_cli.services.fitting import DEFAULT_SAVE_ITERS

# Logs go to stderr; stdout carries tables and CSV.
LOGGING_CONFIG = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "default": {
            "format": "%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        }
    },
    "handlers": {
        "stderr": {
            "class": "logging.StreamHandler",
            "stream": "ext://sys.stderr",
            "formatter": "default",
        }
    },
    "loggers": {
        "": {"handlers": ["stderr"], "level": "WARNING"},
        "eigengs_core": {"handlers": ["stderr"], "level": "INFO", "propagate": False},
        "eigengs_cli": {"handlers": ["stderr"], "level": "INFO", "propagate": False},
        "numba": {"level": "WARNING"},
    },
}

logger = logging.getLogger(__name__)

app = typer.Typer(
    name="eigengs",
    help="Eigenbasis Gaussian splatting: train shared Gaussians, initialize and fine-tune images.",
    no_args_is_help=True,
)
console = Console()
err_console = Console(stderr=True)

USAGE_ERROR = 2


class SpaceChoice(str, enum.Enum):
    rgb = "rgb"
    ycbcr = "ycbcr"
    gray = "gray"

    def to_space(self) -> ColorSpace:
        return {
            SpaceChoice.rgb: ColorSpace.RGB,
            SpaceChoice.ycbcr: ColorSpace.YCBCR,
            SpaceChoice.gray: ColorSpace.LINEAR,
        }[self]


def configure_logging(level: str) -> None:
    config = {**LOGGING_CONFIG, "loggers": {name: dict(cfg) for name, cfg in LOGGING_CONFIG["loggers"].items()}}
    for name in ("eigengs_core", "eigengs_cli"):
        config["loggers"][name]["level"] = level.upper()
    logging.config.dictConfig(config)


@contextmanager
def handle_errors() -> Iterator[None]:
    """Map library failures to messages on stderr and exit codes."""
    try:
        yield
    except (ValidationError, ConfigurationError) as e:
        err_console.print(f"[red]Invalid configuration:[/red] {e}")
        raise typer.Exit(USAGE_ERROR)
    except (EigenGSError, OSError, ValueError) as e:
        logger.debug("Command failed", exc_info=True)
        err_console.print(f"[red]Error:[/red] {e}")
        raise typer.Exit(1)


def parse_iterations(value: str) -> tuple[int, ...]:
    """``"0,10,100"`` → (0, 10, 100)."""
    try:
        iterations = tuple(sorted({int(part) for part in value.split(",") if part.strip()}))
    except ValueError:
        raise typer.BadParameter(f"expected comma-separated integers, got {value!r}")
    if any(t < 0 for t in iterations):
        raise typer.BadParameter("iterations must be >= 0")
    return iterations


@app.callback()
def main(
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Debug logging"),
    threads: Optional[int] = typer.Option(
        None, "--threads", min=1, help="Cap on kernel threads (default EIGENGS_THREADS or CPU count)"
    ),
):
    """EigenGS batch pipeline."""
    configure_logging("DEBUG" if verbose else settings.log_level)
    if threads is not None:
        settings.threads = threads
    configure_threads(threads)


@app.command("train-basis")
def train_basis(
    corpus_dir: Path = typer.Option(..., "--dir", exists=True, file_okay=False, help="Directory of training PNGs"),
    width: int = typer.Option(..., "--width", min=1),
    height: int = typer.Option(..., "--height", min=1),
    components: int = typer.Option(..., "--components", min=1, help="Eigenimages to keep (k)"),
    gaussians: int = typer.Option(1000, "--gaussians", min=1, help="Shared Gaussian count"),
    low_frac: float = typer.Option(0.10, "--low-frac", help="Share of Gaussians in the low-frequency set"),
    k_low: Optional[int] = typer.Option(None, "--k-low", help="Low-frequency components (default ceil(k/10))"),
    iters1: int = typer.Option(1500, "--iters1", min=0, help="Phase-1 iterations"),
    iters2: int = typer.Option(1500, "--iters2", min=0, help="Phase-2 iterations"),
    seed: int = typer.Option(0, "--seed", min=0),
    space: SpaceChoice = typer.Option(SpaceChoice.ycbcr, "--space", case_sensitive=False),
    freq_learning: bool = typer.Option(True, "--freq-learning/--no-freq-learning"),
    out: Path = typer.Option(..., "--out", dir_okay=False, help="Output .egs1 file"),
    report: Optional[Path] = typer.Option(None, "--report", help="Training CSV (default <out>_train.csv)"),
    lr_pos: float = typer.Option(2e-3, "--lr-pos"),
    lr_fac: float = typer.Option(2e-3, "--lr-fac"),
    lr_weight: float = typer.Option(1e-2, "--lr-weight"),
    init_scale: float = typer.Option(0.02, "--init-scale", help="Initial Gaussian scale as a fraction of min(w, h)"),
    eval_every: int = typer.Option(50, "--eval-every", min=1),
):
    """Fit an eigenbasis to a corpus and train shared Gaussians on it."""
    with handle_errors():
        config = TrainConfig(
            n_gaussians=gaussians,
            low_fraction=low_frac,
            k_low=k_low,
            lrs=LearningRates(pos=lr_pos, fac=lr_fac, weight=lr_weight),
            phase1_iters=iters1,
            phase2_iters=iters2,
            seed=seed,
            freq_learning=freq_learning,
            init_scale=init_scale,
            eval_every=eval_every,
        )
        result = TrainingService(config).run(corpus_dir, width, height, components, space.to_space(), out, report)

    last = result.report.last
    console.print(
        f"[green]✓[/green] {result.model_path}: k={result.basis.k}, N={result.model.n_gaussians}, "
        f"n_low={result.model.n_low}, final component PSNR {last.psnr_db:.2f} dB"
    )


@app.command()
def fit(
    model: Path = typer.Option(..., "--model", exists=True, dir_okay=False),
    image: Optional[List[Path]] = typer.Option(None, "--image", exists=True, dir_okay=False, help="Image to fit (repeatable)"),
    images: Optional[Path] = typer.Option(None, "--images", exists=True, file_okay=False, help="Directory of PNGs to fit"),
    iters: int = typer.Option(1000, "--iters", min=0),
    eval_every: int = typer.Option(50, "--eval-every", min=1),
    out_dir: Path = typer.Option(..., "--out-dir", file_okay=False),
    save_iters: str = typer.Option(",".join(str(t) for t in DEFAULT_SAVE_ITERS), "--save-iters"),
    init: InitMode = typer.Option(InitMode.EIGEN, "--init", case_sensitive=False),
    resize: bool = typer.Option(False, "--resize", help="Resize inputs to the model's shape"),
    workers: int = typer.Option(settings.fit_workers, "--workers", min=1, help="Images fitted in parallel"),
    seed: int = typer.Option(0, "--seed", min=0, help="Seed for --init random"),
    lr_pos: float = typer.Option(2e-3, "--lr-pos"),
    lr_fac: float = typer.Option(2e-3, "--lr-fac"),
    lr_weight: float = typer.Option(1e-2, "--lr-weight"),
):
    """Initialize images from a model and fine-tune them."""
    paths = list(image or [])
    if images is not None:
        paths.extend(sorted(p for p in images.iterdir() if p.is_file() and p.suffix.lower() == ".png"))
    if not paths:
        err_console.print("[red]Error:[/red] no images given (use --image or --images)")
        raise typer.Exit(USAGE_ERROR)

    with handle_errors():
        options = FitOptions(
            out_dir=out_dir,
            iters=iters,
            eval_every=eval_every,
            save_iters=parse_iterations(save_iters),
            init=init,
            resize=resize,
            lrs=LearningRates(pos=lr_pos, fac=lr_fac, weight=lr_weight),
            seed=seed,
        )
        outcomes = FitService(model, options, workers).run(paths)

    table = Table(title=f"Fitted {len(outcomes)} image(s)")
    for column in ("image", "PCA dB", "init dB", "final dB", "status"):
        table.add_column(column)
    for o in outcomes:
        table.add_row(
            o.image, f"{o.pca_psnr_db:.2f}", f"{o.init_psnr_db:.2f}", f"{o.final_psnr_db:.2f}",
            "[green]ok[/green]" if o.ok else f"[red]failed[/red] {o.error}",
        )
    console.print(table)

    if any(not o.ok for o in outcomes):
        raise typer.Exit(1)


@app.command("eval")
def evaluate(
    reports: str = typer.Option(..., "--reports", help="Glob of report CSVs, e.g. 'out/*.csv'"),
    threshold_db: float = typer.Option(35.0, "--threshold-db"),
    svg_out: Optional[Path] = typer.Option(None, "--svg-out", dir_okay=False),
    csv_out: Optional[Path] = typer.Option(None, "--csv-out", dir_okay=False),
):
    """Aggregate fit reports: mean ± std PSNR/SSIM per iteration and % above threshold."""
    paths = [p for p in find_reports(reports) if p.name != "summary.csv" and not p.stem.endswith("_train")]
    if not paths:
        err_console.print(f"[red]Error:[/red] no reports match {reports!r}")
        raise typer.Exit(USAGE_ERROR)

    with handle_errors():
        loaded = [read_report(p) for p in paths]
        rows = aggregate_reports(loaded, threshold_db)
        if csv_out is not None:
            write_rows(csv_out, AGGREGATE_COLUMNS, (r.as_row() for r in rows))
        if svg_out is not None:
            write_curve_svg(
                svg_out,
                [r.iteration for r in rows],
                [r.psnr_mean for r in rows],
                [r.psnr_std for r in rows],
                threshold_db=threshold_db,
                title=f"PSNR over {len(loaded)} report(s)",
            )

    table = Table(title=f"{len(loaded)} report(s), threshold {threshold_db:g} dB")
    for column in ("iteration", "n", "PSNR mean", "PSNR std", "SSIM mean", "SSIM std", f"% > {threshold_db:g} dB"):
        table.add_column(column, justify="right")
    for r in rows:
        table.add_row(
            str(r.iteration), str(r.count), f"{r.psnr_mean:.3f}", f"{r.psnr_std:.3f}",
            f"{r.ssim_mean:.4f}", f"{r.ssim_std:.4f}", f"{r.pct_above_threshold:.1f}",
        )
    console.print(table)


@app.command()
def radii(
    model: Path = typer.Option(..., "--model", exists=True, dir_okay=False),
    bins: int = typer.Option(20, "--bins", min=1),
    max_radius: Optional[float] = typer.Option(None, "--max-radius", help="Upper histogram edge (default: largest radius)"),
    out: Optional[Path] = typer.Option(None, "--out", dir_okay=False, help="CSV path (default: stdout)"),
):
    """Histogram of Gaussian radii per partition."""
    with handle_errors():
        bundle = load_model(model)
        rows = radius_histogram(bundle.model, bins, max_radius)
        for partition, stats in radius_summary(bundle.model).items():
            logger.info(
                f"{partition}: {stats['count']} Gaussians, median radius {stats['median']:.3f} px "
                f"(p10 {stats['p10']:.3f}, p90 {stats['p90']:.3f})"
            )
        if out is not None:
            write_rows(out, HISTOGRAM_COLUMNS, rows)
            console.print(f"[green]✓[/green] Wrote {len(rows)} histogram rows to {out}")
            return

    typer.echo(",".join(HISTOGRAM_COLUMNS))
    for partition, lo, hi, count in rows:
        typer.echo(f"{partition},{lo!r},{hi!r},{count}")


@app.command()
def info(model: Path = typer.Option(..., "--model", exists=True, dir_okay=False)):
    """Show a model file's header, spectrum and partitions."""
    with handle_errors():
        bundle = load_model(model)
    basis, eigen_model = bundle.basis, bundle.model
    width, height, channels, k = eigen_model.basis_shape

    table = Table(title=str(model), show_header=False)
    table.add_column("field")
    table.add_column("value")
    table.add_row("size", f"{width}×{height}×{channels}")
    table.add_row("color space", basis.space.value)
    table.add_row("components (k)", str(k))
    table.add_row("Gaussians", str(eigen_model.n_gaussians))
    table.add_row("low-frequency set", f"{eigen_model.n_low} Gaussians, {eigen_model.k_low} components")
    table.add_row("eigenvalues", f"{basis.eigenvalues[0]:.4g} … {basis.eigenvalues[-1]:.4g}")
    ratio = basis.explained_variance_ratio()
    table.add_row("share of kept variance in first 10%", f"{ratio[: max(1, k // 10)].sum():.1%}")
    console.print(table)


def _normalized(plane: np.ndarray) -> PlanarImage:
    lo, hi = float(plane.min()), float(plane.max())
    scaled = (plane - lo) / (hi - lo) if hi > lo else np.zeros_like(plane)
    space = ColorSpace.LINEAR if plane.shape[2] == 1 else ColorSpace.RGB
    return PlanarImage(scaled, space)


@app.command()
def components(
    model: Path = typer.Option(..., "--model", exists=True, dir_okay=False),
    out_dir: Path = typer.Option(..., "--out-dir", file_okay=False),
):
    """Write each eigenimage next to its Gaussian render, min/max normalized."""
    with handle_errors():
        bundle = load_model(model)
        renders = render_components(bundle.model)
        for j, (target, rendered) in enumerate(zip(bundle.basis.component_images(), renders)):
            save_png(_normalized(target.data), out_dir / f"component_{j:03d}.png")
            save_png(_normalized(rendered.data), out_dir / f"component_{j:03d}_gaussians.png")
    console.print(f"[green]✓[/green] Wrote {2 * len(renders)} images to {out_dir}")


@app.command()
def synth(
    out_dir: Path = typer.Option(..., "--out-dir", file_okay=False),
    count: int = typer.Option(200, "--count", min=1),
    width: int = typer.Option(64, "--width", min=1),
    height: int = typer.Option(64, "--height", min=1),
    seed: int = typer.Option(0, "--seed", min=0),
    gray: bool = typer.Option(False, "--gray", help="Single-channel images"),
):
    """Generate a synthetic corpus of smooth blobs over gradients."""
    with handle_errors():
        paths = write_corpus(out_dir, count, width, height, seed=seed, grayscale=gray)
    console.print(f"[green]✓[/green] Wrote {len(paths)} images to {out_dir}")


if __name__ == "__main__":
    sys.exit(app())

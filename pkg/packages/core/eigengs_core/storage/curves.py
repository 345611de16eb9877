"""SVG line charts of PSNR against iteration."""

import io
import logging
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from matplotlib.figure import Figure

logger = logging.getLogger(__name__)

FIGSIZE = (8, 5)


def render_curve_svg(
    iterations: Sequence[float],
    means: Sequence[float],
    stds: Optional[Sequence[float]] = None,
    threshold_db: Optional[float] = None,
    title: str = "PSNR vs iteration",
) -> str:
    """
    Build an SVG chart of mean PSNR per sampled iteration.

    Non-finite means (identical images) are left out of the line. A shaded
    band shows ±1 std when given; a dashed line marks the threshold. The
    layers carry the SVG ids ``psnr``, ``band`` and ``threshold``.
    """
    xs = np.asarray(iterations, dtype=np.float64)
    ys = np.asarray(means, dtype=np.float64)
    finite = np.isfinite(ys)
    xs, ys = xs[finite], ys[finite]

    fig = Figure(figsize=FIGSIZE)
    ax = fig.add_subplot()

    if stds is not None and ys.size:
        sd = np.nan_to_num(np.asarray(stds, dtype=np.float64)[finite])
        band = ax.fill_between(xs, ys - sd, ys + sd, color="steelblue", alpha=0.2, linewidth=0)
        band.set_gid("band")

    if threshold_db is not None:
        threshold = ax.axhline(threshold_db, color="firebrick", linestyle="--", linewidth=1)
        threshold.set_gid("threshold")

    (line,) = ax.plot(xs, ys, color="steelblue", linewidth=2, marker="o", markersize=3)
    line.set_gid("psnr")

    ax.set_xlabel("iteration")
    ax.set_ylabel("PSNR (dB)")
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()

    buffer = io.BytesIO()
    fig.savefig(buffer, format="svg", metadata={"Date": None})
    return buffer.getvalue().decode("utf-8")


def write_curve_svg(path: str | Path, *args, **kwargs) -> Path:
    """Render a chart with ``render_curve_svg`` and write it to ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render_curve_svg(*args, **kwargs))
    logger.info(f"Wrote PSNR curve to {path}")
    return path

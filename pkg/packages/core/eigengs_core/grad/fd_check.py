"""
Central finite-difference check of the analytic gradients.

Runs on small random instances in float64 with no float32 rounding, so the
comparison measures the derivation rather than storage precision. Position and
factor entries whose ±ε perturbation moves a pixel across the σ cutoff are
skipped and counted, since the loss is not differentiable there.
"""

import enum
import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import expit, logit

from eigengs_core.grad.backward import Objective, components_objective, image_objective
from eigengs_core.splat.raster import SIGMA_CUT, gaussian_geometry, rasterize

logger = logging.getLogger(__name__)

PARAM_GROUPS = ("pos_raw", "fac_raw", "weights")


class RenderMode(str, enum.Enum):
    COMPONENTS = "components"
    IMAGE = "image"


@dataclass(frozen=True)
class InstanceSpec:
    """Size and seed of a random gradient-check instance."""

    width: int = 12
    height: int = 12
    n_gaussians: int = 6
    n_components: int = 3
    channels: int = 1
    mode: RenderMode = RenderMode.COMPONENTS
    seed: int = 0
    zero_loss: bool = False

    def __post_init__(self):
        object.__setattr__(self, "mode", RenderMode(self.mode))


@dataclass
class Instance:
    """float64 parameters and targets of one check instance."""

    spec: InstanceSpec
    params: dict[str, np.ndarray]
    targets: np.ndarray
    mean: Optional[np.ndarray] = None

    def objective(self, params: dict[str, np.ndarray], with_grads: bool) -> Objective:
        spec = self.spec
        if spec.mode is RenderMode.IMAGE:
            return image_objective(
                params["pos_raw"], params["fac_raw"], params["weights"], self.mean, self.targets,
                spec.width, spec.height, round_prediction=False, with_grads=with_grads,
            )
        return components_objective(
            params["pos_raw"], params["fac_raw"], params["weights"], self.targets,
            spec.width, spec.height, round_prediction=False, with_grads=with_grads,
        )


def build_instance(spec: InstanceSpec) -> Instance:
    """
    Random Gaussians with scales of 1.5–3 px placed away from the border.

    With ``zero_loss`` the targets are the instance's own render.
    """
    rng = np.random.default_rng(spec.seed)
    n = spec.n_gaussians
    k = 1 if spec.mode is RenderMode.IMAGE else spec.n_components

    scale = rng.uniform(1.5, 3.0, size=(n, 2))
    params = {
        "pos_raw": logit(rng.uniform(0.2, 0.8, size=(n, 2))),
        "fac_raw": np.column_stack(
            [np.log(1.0 / scale[:, 0]), rng.normal(0.0, 0.15, size=n), np.log(1.0 / scale[:, 1])]
        ),
        "weights": rng.normal(0.0, 0.5, size=(n, k, spec.channels)),
    }
    if spec.mode is RenderMode.IMAGE:
        params["weights"] = params["weights"][:, 0, :]

    shape = (spec.height, spec.width, spec.channels)
    mean = rng.uniform(0.0, 1.0, size=shape) if spec.mode is RenderMode.IMAGE else None

    if spec.zero_loss:
        instance = Instance(spec, params, np.zeros((k,) + shape if mean is None else shape), mean)
        targets = instance.objective(params, with_grads=False).prediction
    else:
        targets = rng.uniform(0.0, 1.0, size=(k,) + shape if mean is None else shape)
    return Instance(spec, params, targets, mean)


@dataclass(frozen=True)
class FDEntry:
    """Analytic and numeric derivative of one raw parameter entry."""

    group: str
    index: int
    analytic: float
    numeric: float
    abs_error: float
    rel_error: float
    ok: bool


@dataclass
class FDReport:
    entries: list[FDEntry] = field(default_factory=list)
    skipped: int = 0

    @property
    def checked(self) -> int:
        return len(self.entries)

    @property
    def max_abs_error(self) -> float:
        return max((e.abs_error for e in self.entries), default=0.0)

    @property
    def max_rel_error(self) -> float:
        return max((e.rel_error for e in self.entries), default=0.0)

    @property
    def flagged(self) -> list[FDEntry]:
        return [e for e in self.entries if not e.ok]

    @property
    def passed(self) -> bool:
        return not self.flagged


def _coverage(pos_row: np.ndarray, fac_row: np.ndarray, width: int, height: int) -> np.ndarray:
    """Pixels where one Gaussian passes the σ cutoff."""
    geometry = gaussian_geometry(pos_row[None], fac_row[None], width, height)
    ys, xs = np.mgrid[0:height, 0:width] + 0.5
    dx = xs - geometry.cx[0]
    dy = ys - geometry.cy[0]
    u = geometry.la[0] * dx + geometry.lb[0] * dy
    v = geometry.lc[0] * dy
    return 0.5 * (u * u + v * v) <= SIGMA_CUT


def fd_check(
    spec: InstanceSpec,
    eps: float = 1e-3,
    rtol: float = 1e-3,
    atol: float = 1e-6,
    corrupt: Optional[Callable[[dict[str, np.ndarray]], None]] = None,
) -> FDReport:
    """
    Compare analytic gradients to central differences on every raw parameter.

    Args:
        spec: Instance to build
        eps: Central-difference step on raw parameters
        rtol: Relative tolerance
        atol: Absolute tolerance; an entry passes if either holds
        corrupt: Optional hook that edits the analytic gradients in place
            before comparison

    Returns:
        FDReport with one entry per compared parameter
    """
    instance = build_instance(spec)
    base = instance.objective(instance.params, with_grads=True)
    analytic = {
        "pos_raw": np.array(base.d_pos_raw),
        "fac_raw": np.array(base.d_fac_raw),
        "weights": np.array(base.d_weights),
    }
    if corrupt is not None:
        corrupt(analytic)

    report = FDReport()
    for group in PARAM_GROUPS:
        values = instance.params[group]
        flat_analytic = analytic[group].reshape(-1)
        for index in range(values.size):
            position = np.unravel_index(index, values.shape)
            gaussian = position[0]

            shifted = []
            for step in (eps, -eps):
                params = {name: array.copy() for name, array in instance.params.items()}
                params[group][position] += step
                shifted.append(params)

            if group != "weights":
                masks = [
                    _coverage(p["pos_raw"][gaussian], p["fac_raw"][gaussian], spec.width, spec.height)
                    for p in [instance.params] + shifted
                ]
                if not (np.array_equal(masks[0], masks[1]) and np.array_equal(masks[0], masks[2])):
                    report.skipped += 1
                    continue

            plus = instance.objective(shifted[0], with_grads=False).loss
            minus = instance.objective(shifted[1], with_grads=False).loss
            numeric = (plus - minus) / (2.0 * eps)
            value = float(flat_analytic[index])

            abs_error = abs(value - numeric)
            scale = max(abs(value), abs(numeric))
            rel_error = abs_error / scale if scale > 0 else 0.0
            report.entries.append(
                FDEntry(group, index, value, numeric, abs_error, rel_error, rel_error <= rtol or abs_error <= atol)
            )

    logger.info(
        f"FD check seed={spec.seed}: {report.checked} entries, {report.skipped} skipped, "
        f"max rel {report.max_rel_error:.2e}, max abs {report.max_abs_error:.2e}"
    )
    return report

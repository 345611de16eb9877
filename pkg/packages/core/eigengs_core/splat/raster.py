"""
Tile-binned CPU rasterizer for depth-invariant 2D Gaussians.

Pixel (x, y) is sampled at its center (x + 0.5, y + 0.5). A Gaussian adds
``weight · exp(-σ)`` with σ = ½·dᵀΣ⁻¹d wherever σ ≤ ``SIGMA_CUT`` and nothing
elsewhere; the cutoff is part of the rendering definition, so the forward pass,
backward pass and any reference evaluation share it.

Each 16×16 tile owns a CSR list of the Gaussians whose padded σ-ellipse
bounding box reaches it, in ascending Gaussian order. Tiles are processed in
parallel and write disjoint pixels; the backward pass writes one scratch row
per (tile, Gaussian) entry and merges them serially in tile order, so results
are bit-reproducible for a given input.
"""

import logging
from typing import NamedTuple

import numpy as np
from numba import njit, prange
from scipy.special import expit

logger = logging.getLogger(__name__)

TILE_SIZE = 16
SIGMA_CUT = 9.0

# Caps the bounding box of nearly degenerate ellipses.
_MAX_EXTENT_FACTOR = 4.0


class SplatGeometry(NamedTuple):
    """Pixel-space Gaussian geometry plus the tile binning built from it."""

    width: int
    height: int
    cx: np.ndarray
    cy: np.ndarray
    la: np.ndarray
    lb: np.ndarray
    lc: np.ndarray
    x0: np.ndarray
    x1: np.ndarray
    y0: np.ndarray
    y1: np.ndarray
    offsets: np.ndarray
    idx: np.ndarray
    tiles_x: int
    tiles_y: int

    @property
    def n_gaussians(self) -> int:
        return self.cx.shape[0]

    @property
    def n_entries(self) -> int:
        return self.idx.shape[0]


@njit(cache=True)
def _bin_tiles(x0, x1, y0, y1, tiles_x, tiles_y):
    n_tiles = tiles_x * tiles_y
    counts = np.zeros(n_tiles + 1, dtype=np.int64)
    for g in range(x0.shape[0]):
        if x0[g] > x1[g] or y0[g] > y1[g]:
            continue
        for ty in range(y0[g] // TILE_SIZE, y1[g] // TILE_SIZE + 1):
            for tx in range(x0[g] // TILE_SIZE, x1[g] // TILE_SIZE + 1):
                counts[ty * tiles_x + tx + 1] += 1

    offsets = np.cumsum(counts)
    idx = np.empty(offsets[n_tiles], dtype=np.int64)
    cursor = offsets[:n_tiles].copy()
    for g in range(x0.shape[0]):
        if x0[g] > x1[g] or y0[g] > y1[g]:
            continue
        for ty in range(y0[g] // TILE_SIZE, y1[g] // TILE_SIZE + 1):
            for tx in range(x0[g] // TILE_SIZE, x1[g] // TILE_SIZE + 1):
                t = ty * tiles_x + tx
                idx[cursor[t]] = g
                cursor[t] += 1
    return offsets, idx


def gaussian_geometry(
    pos_raw: np.ndarray, fac_raw: np.ndarray, width: int, height: int
) -> SplatGeometry:
    """
    Map raw parameters to pixel-space centers and factors and bin them into tiles.

    Args:
        pos_raw: (N, 2) center logits
        fac_raw: (N, 3) raw factor (a, b, c)
        width: Canvas width in pixels
        height: Canvas height in pixels

    Returns:
        SplatGeometry for the kernels
    """
    pos = np.asarray(pos_raw, dtype=np.float64).reshape(-1, 2)
    fac = np.asarray(fac_raw, dtype=np.float64).reshape(-1, 3)

    cx = np.ascontiguousarray(width * expit(pos[:, 0]))
    cy = np.ascontiguousarray(height * expit(pos[:, 1]))
    la = np.ascontiguousarray(np.exp(fac[:, 0]))
    lb = np.ascontiguousarray(fac[:, 1])
    lc = np.ascontiguousarray(np.exp(fac[:, 2]))

    # Half extents of the σ = SIGMA_CUT ellipse: sqrt(2·cut·Σ_xx), sqrt(2·cut·Σ_yy).
    limit = _MAX_EXTENT_FACTOR * (width + height)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        rx = np.sqrt(2.0 * SIGMA_CUT * (lb * lb + lc * lc) / (la * la * lc * lc))
        ry = np.sqrt(2.0 * SIGMA_CUT / (lc * lc))
    rx = np.nan_to_num(np.minimum(rx, limit), nan=limit)
    ry = np.nan_to_num(np.minimum(ry, limit), nan=limit)

    x0 = np.maximum(np.floor(cx - rx - 0.5) - 1, 0).astype(np.int64)
    x1 = np.minimum(np.ceil(cx + rx - 0.5) + 1, width - 1).astype(np.int64)
    y0 = np.maximum(np.floor(cy - ry - 0.5) - 1, 0).astype(np.int64)
    y1 = np.minimum(np.ceil(cy + ry - 0.5) + 1, height - 1).astype(np.int64)

    tiles_x = (width + TILE_SIZE - 1) // TILE_SIZE
    tiles_y = (height + TILE_SIZE - 1) // TILE_SIZE
    offsets, idx = _bin_tiles(x0, x1, y0, y1, tiles_x, tiles_y)

    return SplatGeometry(
        width, height, cx, cy, la, lb, lc, x0, x1, y0, y1, offsets, idx, tiles_x, tiles_y
    )


@njit(parallel=True, cache=True, nogil=True)
def _forward_kernel(offsets, idx, cx, cy, la, lb, lc, x0, x1, y0, y1, weights, tiles_x, cut, out):
    n_tiles = offsets.shape[0] - 1
    n_comp = weights.shape[1]
    n_chan = weights.shape[2]
    height = out.shape[1]
    width = out.shape[2]

    for t in prange(n_tiles):
        tx0 = (t % tiles_x) * TILE_SIZE
        ty0 = (t // tiles_x) * TILE_SIZE
        tx1 = min(tx0 + TILE_SIZE, width) - 1
        ty1 = min(ty0 + TILE_SIZE, height) - 1

        for entry in range(offsets[t], offsets[t + 1]):
            g = idx[entry]
            px0 = max(tx0, x0[g])
            px1 = min(tx1, x1[g])
            py0 = max(ty0, y0[g])
            py1 = min(ty1, y1[g])

            for py in range(py0, py1 + 1):
                dy = py + 0.5 - cy[g]
                for px in range(px0, px1 + 1):
                    dx = px + 0.5 - cx[g]
                    u = la[g] * dx + lb[g] * dy
                    v = lc[g] * dy
                    sigma = 0.5 * (u * u + v * v)
                    if sigma > cut:
                        continue
                    falloff = np.exp(-sigma)
                    for j in range(n_comp):
                        for c in range(n_chan):
                            out[j, py, px, c] += weights[g, j, c] * falloff


@njit(parallel=True, cache=True, nogil=True)
def _backward_kernel(
    offsets, idx, cx, cy, la, lb, lc, x0, x1, y0, y1, weights, grad_out, tiles_x, cut, g_w, g_geo
):
    n_tiles = offsets.shape[0] - 1
    n_comp = weights.shape[1]
    n_chan = weights.shape[2]
    height = grad_out.shape[1]
    width = grad_out.shape[2]

    for t in prange(n_tiles):
        tx0 = (t % tiles_x) * TILE_SIZE
        ty0 = (t // tiles_x) * TILE_SIZE
        tx1 = min(tx0 + TILE_SIZE, width) - 1
        ty1 = min(ty0 + TILE_SIZE, height) - 1

        for entry in range(offsets[t], offsets[t + 1]):
            g = idx[entry]
            px0 = max(tx0, x0[g])
            px1 = min(tx1, x1[g])
            py0 = max(ty0, y0[g])
            py1 = min(ty1, y1[g])

            acc_cx = 0.0
            acc_cy = 0.0
            acc_a = 0.0
            acc_b = 0.0
            acc_c = 0.0
            for py in range(py0, py1 + 1):
                dy = py + 0.5 - cy[g]
                for px in range(px0, px1 + 1):
                    dx = px + 0.5 - cx[g]
                    u = la[g] * dx + lb[g] * dy
                    v = lc[g] * dy
                    sigma = 0.5 * (u * u + v * v)
                    if sigma > cut:
                        continue
                    falloff = np.exp(-sigma)

                    dot = 0.0
                    for j in range(n_comp):
                        for c in range(n_chan):
                            upstream = grad_out[j, py, px, c]
                            g_w[entry, j, c] += upstream * falloff
                            dot += upstream * weights[g, j, c]

                    # dL/dσ
                    gs = -dot * falloff
                    acc_cx -= gs * u * la[g]
                    acc_cy -= gs * (u * lb[g] + v * lc[g])
                    acc_a += gs * u * dx * la[g]
                    acc_b += gs * u * dy
                    acc_c += gs * v * dy * lc[g]

            g_geo[entry, 0] = acc_cx
            g_geo[entry, 1] = acc_cy
            g_geo[entry, 2] = acc_a
            g_geo[entry, 3] = acc_b
            g_geo[entry, 4] = acc_c


@njit(cache=True)
def _merge(idx, g_w, g_geo, d_w, d_geo):
    n_comp = g_w.shape[1]
    n_chan = g_w.shape[2]
    for entry in range(idx.shape[0]):
        g = idx[entry]
        for j in range(n_comp):
            for c in range(n_chan):
                d_w[g, j, c] += g_w[entry, j, c]
        for q in range(5):
            d_geo[g, q] += g_geo[entry, q]


def rasterize(geometry: SplatGeometry, weights: np.ndarray) -> np.ndarray:
    """
    Sum weighted Gaussians into K component planes.

    Args:
        geometry: Output of ``gaussian_geometry``
        weights: (N, K, C) weights

    Returns:
        (K, h, w, C) float64 planes
    """
    weights = np.ascontiguousarray(weights, dtype=np.float64)
    n, n_comp, n_chan = weights.shape
    out = np.zeros((n_comp, geometry.height, geometry.width, n_chan), dtype=np.float64)
    if n == 0 or geometry.n_entries == 0:
        return out

    g = geometry
    _forward_kernel(
        g.offsets, g.idx, g.cx, g.cy, g.la, g.lb, g.lc, g.x0, g.x1, g.y0, g.y1,
        weights, g.tiles_x, SIGMA_CUT, out,
    )
    return out


def rasterize_backward(
    geometry: SplatGeometry, weights: np.ndarray, grad_out: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """
    Pull an upstream gradient on the rendered planes back to the Gaussians.

    Args:
        geometry: Output of ``gaussian_geometry``
        weights: (N, K, C) weights used in the forward pass
        grad_out: (K, h, w, C) dL/d(render)

    Returns:
        (d_weights (N, K, C), d_geometry (N, 5)) where the geometry columns are
        dL/d(cx, cy) in pixels and dL/d(a, b, c) of the raw factor
    """
    weights = np.ascontiguousarray(weights, dtype=np.float64)
    grad_out = np.ascontiguousarray(grad_out, dtype=np.float64)
    n, n_comp, n_chan = weights.shape

    d_w = np.zeros((n, n_comp, n_chan), dtype=np.float64)
    d_geo = np.zeros((n, 5), dtype=np.float64)
    if n == 0 or geometry.n_entries == 0:
        return d_w, d_geo

    g = geometry
    g_w = np.zeros((g.n_entries, n_comp, n_chan), dtype=np.float64)
    g_geo = np.zeros((g.n_entries, 5), dtype=np.float64)
    _backward_kernel(
        g.offsets, g.idx, g.cx, g.cy, g.la, g.lb, g.lc, g.x0, g.x1, g.y0, g.y1,
        weights, grad_out, g.tiles_x, SIGMA_CUT, g_w, g_geo,
    )
    _merge(g.idx, g_w, g_geo, d_w, d_geo)
    return d_w, d_geo


def position_chain(pos_raw: np.ndarray, d_center: np.ndarray, width: int, height: int) -> np.ndarray:
    """Map dL/d(cx, cy) in pixels to dL/d(pos_raw) through the logistic map."""
    mu = expit(np.asarray(pos_raw, dtype=np.float64))
    scale = np.array([width, height], dtype=np.float64)
    return d_center * scale * mu * (1.0 - mu)

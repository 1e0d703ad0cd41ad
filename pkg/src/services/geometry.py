"""
Window geometry, translation edge correction and fixed-radius pair enumeration.
"""
import logging
import math

import numpy as np
from scipy.spatial import cKDTree

from src.conf import messages
from src.conf.config import settings
from src.core.exceptions import InvalidInputError, MissingIntensityError
from src.core.quadrature import gauss_legendre
from src.entity.models import (
    ConstantIntensity,
    IntensityGrid,
    IntensityModel,
    PairList,
    PointPattern,
    PointwiseIntensity,
    Window,
)

logger = logging.getLogger(__name__)

_NEIGHBOUR_OFFSETS = [(ox, oy) for ox in (-1, 0, 1) for oy in (-1, 0, 1)]


def set_covariance(window: Window, dx, dy):
    """
    Area of the window intersected with its translate by (dx, dy).

    Args:
        window (Window): Rectangle W.
        dx (float | np.ndarray): Horizontal shift.
        dy (float | np.ndarray): Vertical shift.

    Returns:
        float | np.ndarray: |W ∩ W_(dx, dy)|, clamped at 0.
    """
    overlap = np.maximum(0.0, window.width - np.abs(dx)) * np.maximum(
        0.0, window.height - np.abs(dy)
    )
    return float(overlap) if np.ndim(overlap) == 0 else overlap


def iso_set_covariance_quadrature(window: Window, t, nodes: int | None = None) -> np.ndarray:
    """Direction-averaged set covariance by Gauss-Legendre quadrature over [0, pi/2]."""
    nodes = nodes or settings.ANGULAR_NODES
    theta, weights = gauss_legendre(nodes, 0.0, 0.5 * math.pi)
    t = np.asarray(t, dtype=float)
    shifts = t[..., None]
    overlap = set_covariance(window, shifts * np.cos(theta), shifts * np.sin(theta))
    return (2.0 / math.pi) * np.sum(overlap * weights, axis=-1)


def iso_set_covariance(window: Window, t):
    """
    Isotropised set covariance gamma(t), the mean of |W ∩ W_w| over directions of w, |w| = t.

    Uses the closed form for t up to the shorter side and angular quadrature beyond it.
    """
    t = np.asarray(t, dtype=float)
    lx, ly = window.width, window.height
    closed = lx * ly - (2.0 / math.pi) * (lx + ly) * t + t * t / math.pi
    result = np.where(t <= window.min_side, closed, 0.0)
    beyond = t > window.min_side
    if np.any(beyond):
        result = np.array(result, dtype=float)
        result[beyond] = iso_set_covariance_quadrature(window, t[beyond])
    return float(result) if np.ndim(result) == 0 else result


def resolve_intensity(pattern: PointPattern, intensity: IntensityModel | None) -> np.ndarray:
    """
    Per-point intensity values for a pattern.

    Raises:
        MissingIntensityError: If no model is given and the pattern carries no intensity column.
    """
    if intensity is None:
        if pattern.intensity is None:
            raise MissingIntensityError(messages.INTENSITY_MISSING)
        return np.asarray(pattern.intensity)
    return intensity.at_points(pattern.n)


def unordered_ids(i: np.ndarray, j: np.ndarray, n_points: int) -> np.ndarray:
    key = np.minimum(i, j).astype(np.int64) * n_points + np.maximum(i, j)
    _, ids = np.unique(key, return_inverse=True)
    return ids.ravel()


def _check_bounds(window: Window, r_lo: float, r_hi: float) -> None:
    if not (0.0 <= r_lo < r_hi) or not np.isfinite(r_hi):
        raise InvalidInputError(messages.PAIR_BOUNDS_INVALID)
    if r_hi > window.min_side:
        raise InvalidInputError(messages.RANGE_EXCEEDS_WINDOW)


def _build_pairs(
    pattern: PointPattern,
    i: np.ndarray,
    j: np.ndarray,
    r_lo: float,
    r_hi: float,
    rho: np.ndarray,
    intensity: IntensityModel | None,
) -> PairList:
    dx = pattern.x[j] - pattern.x[i]
    dy = pattern.y[j] - pattern.y[i]
    t = np.hypot(dx, dy)
    keep = (i != j) & (t >= r_lo) & (t <= r_hi)
    i, j, dx, dy, t = i[keep], j[keep], dx[keep], dy[keep], t[keep]

    order = np.lexsort((j, i))
    i, j, dx, dy, t = i[order], j[order], dx[order], dy[order], t[order]
    e = 1.0 / (rho[i] * rho[j] * set_covariance(pattern.window, dx, dy))
    log_rho = np.log(rho)
    return PairList(
        i=i,
        j=j,
        t=t,
        dx=dx,
        dy=dy,
        e=np.asarray(e, dtype=float),
        pair_id=unordered_ids(i, j, pattern.n),
        r_lo=float(r_lo),
        r_hi=float(r_hi),
        n_points=pattern.n,
        window=pattern.window,
        intensity=intensity,
        log_rho_i=log_rho[i],
        log_rho_j=log_rho[j],
    )


def close_pairs(
    pattern: PointPattern,
    r_lo: float,
    r_hi: float,
    intensity: IntensityModel | None = None,
) -> PairList:
    """
    Enumerate all ordered pairs with r_lo <= |v - u| <= r_hi using a uniform cell grid.

    Cells are at least r_hi wide, so every neighbour of a point lies in the
    3 x 3 block of cells around it and the cost is O(n + #pairs).

    Args:
        pattern (PointPattern): Observed points.
        r_lo (float): Lower distance bound (inclusive).
        r_hi (float): Upper distance bound (inclusive), at most the shorter window side.
        intensity (IntensityModel | None): Intensity model; defaults to the pattern's column.

    Returns:
        PairList: Pairs sorted by (i, j), each with its translation edge weight.

    Raises:
        InvalidInputError: On invalid bounds or non-positive intensity.
        MissingIntensityError: If no intensity is available.
    """
    window = pattern.window
    _check_bounds(window, r_lo, r_hi)
    rho = resolve_intensity(pattern, intensity)
    intensity = intensity if intensity is not None else PointwiseIntensity(rho)
    empty = np.empty(0, dtype=np.int64)
    if pattern.n < 2:
        return _build_pairs(pattern, empty, empty, r_lo, r_hi, rho, intensity)

    nx = max(1, int(window.width // r_hi))
    ny = max(1, int(window.height // r_hi))
    cx = np.clip(((pattern.x - window.x0) / (window.width / nx)).astype(np.int64), 0, nx - 1)
    cy = np.clip(((pattern.y - window.y0) / (window.height / ny)).astype(np.int64), 0, ny - 1)
    keys = cx * ny + cy
    order = np.argsort(keys, kind="stable")
    sorted_keys = keys[order]
    points = np.arange(pattern.n, dtype=np.int64)

    sources, targets = [], []
    for ox, oy in _NEIGHBOUR_OFFSETS:
        ncx, ncy = cx + ox, cy + oy
        inside = (ncx >= 0) & (ncx < nx) & (ncy >= 0) & (ncy < ny)
        query = ncx[inside] * ny + ncy[inside]
        lo = np.searchsorted(sorted_keys, query, side="left")
        hi = np.searchsorted(sorted_keys, query, side="right")
        counts = hi - lo
        total = int(counts.sum())
        if total == 0:
            continue
        starts = np.repeat(lo - np.cumsum(counts) + counts, counts)
        sources.append(np.repeat(points[inside], counts))
        targets.append(order[starts + np.arange(total)])

    i = np.concatenate(sources) if sources else empty
    j = np.concatenate(targets) if targets else empty
    pairs = _build_pairs(pattern, i, j, r_lo, r_hi, rho, intensity)
    logger.debug("grid %dx%d, %d points, %d ordered pairs in [%g, %g]", nx, ny, pattern.n, len(pairs), r_lo, r_hi)
    return pairs


def brute_force_pairs(
    pattern: PointPattern,
    r_lo: float,
    r_hi: float,
    intensity: IntensityModel | None = None,
) -> PairList:
    """All-pairs O(n^2) enumeration with the same output as :func:`close_pairs`."""
    _check_bounds(pattern.window, r_lo, r_hi)
    rho = resolve_intensity(pattern, intensity)
    intensity = intensity if intensity is not None else PointwiseIntensity(rho)
    i, j = np.meshgrid(np.arange(pattern.n), np.arange(pattern.n), indexing="ij")
    return _build_pairs(pattern, i.ravel(), j.ravel(), r_lo, r_hi, rho, intensity)


def nearest_intensity_grid(
    pattern: PointPattern, values: np.ndarray, size: int | None = None
) -> IntensityGrid:
    """
    Raster of intensity values filled from the nearest data point of every cell centre.

    Args:
        pattern (PointPattern): Points carrying the values.
        values (np.ndarray): Intensity at each point.
        size (int | None): Cells per side; defaults to ``settings.INTENSITY_GRID_SIZE``.
    """
    size = size or settings.INTENSITY_GRID_SIZE
    if pattern.n == 0:
        raise MissingIntensityError(messages.INTENSITY_MISSING)
    grid = IntensityGrid(pattern.window, np.ones((size, size)))
    xs, ys = grid.centres()
    gx, gy = np.meshgrid(xs, ys)
    _, nearest = cKDTree(pattern.points).query(np.column_stack([gx.ravel(), gy.ravel()]))
    return IntensityGrid(pattern.window, np.asarray(values)[nearest].reshape(size, size))


def intensity_grid_for(pattern: PointPattern, intensity: IntensityModel) -> IntensityGrid | None:
    """The raster used by window integrals; None for a constant intensity."""
    if isinstance(intensity, ConstantIntensity):
        return None
    if isinstance(intensity, PointwiseIntensity) and intensity.grid is not None:
        return intensity.grid
    return nearest_intensity_grid(pattern, intensity.at_points(pattern.n))

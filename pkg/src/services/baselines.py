"""
Comparison estimators: an orthogonal series estimator of g0 - 1 and an Epanechnikov
kernel estimator tuned by least-squares or composite-likelihood cross-validation.
"""
import logging
from dataclasses import dataclass

import numpy as np
from scipy.stats import iqr

from src.conf import constants, messages
from src.conf.config import settings
from src.core.exceptions import InsufficientPairsError, InvalidInputError, NoFeasibleKError
from src.core.quadrature import gauss_legendre
from src.entity.models import BasisSpec, EstimatorKind, IntensityModel, PairList, PointPattern
from src.services.basis import constant_projection, expand, fb_columns, support_argument
from src.services.geometry import close_pairs, intensity_grid_for
from src.services.select import CvCurve, composite_likelihood, pair_integral, scan_truncation

logger = logging.getLogger(__name__)


def _safe_log(g: np.ndarray) -> np.ndarray:
    g = np.asarray(g, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(g > 0, np.log(np.where(g > 0, g, 1.0)), np.nan)


@dataclass(frozen=True, eq=False)
class OseFit:
    """g(r) = 1 + sum_k theta_k phi_k(r - r_min); may be negative."""

    theta: np.ndarray
    basis: BasisSpec
    intensity: IntensityModel | None = None

    kind = EstimatorKind.OSE

    @property
    def K(self) -> int:
        return int(self.theta.size)

    def g(self, r):
        return 1.0 + expand(self.basis, self.theta, r)

    def log_g(self, r):
        """log g where g > 0, NaN elsewhere."""
        return _safe_log(self.g(r))


def ose_terms(pairs: PairList, basis: BasisSpec, K: int) -> np.ndarray:
    """Per-ordered-pair terms e phi_k(s) s / (2 pi t), s = t - r_min; s / t is 1 at t = 0."""
    s = support_argument(basis, pairs.t)
    value, _, _ = fb_columns(basis, s, 0, K)
    ratio = np.divide(s, pairs.t, out=np.ones_like(s), where=pairs.t > 0)
    return (pairs.e * ratio / constants.SURFACE_AREA)[:, None] * value


def ose_fit(
    pattern: PointPattern,
    basis: BasisSpec,
    K: int,
    intensity: IntensityModel | None = None,
) -> OseFit:
    """
    Unbiased coefficient estimates of g0 - 1 on the first K basis functions.

    theta_k sums e phi_k(s) s / (2 pi t) over pairs in [r_min, r_min + R] and
    subtracts the exact projection sqrt(2) R / alpha_k of the constant 1.
    """
    if not 1 <= K <= basis.k_max:
        raise InvalidInputError(messages.BASIS_INDEX_OUT_OF_RANGE)
    pairs = close_pairs(pattern, basis.r_min, basis.upper, intensity)
    theta = ose_terms(pairs, basis, K).sum(axis=0) - constant_projection(basis, K)
    return OseFit(theta=theta, basis=basis, intensity=pairs.intensity)


def ose_select(
    pattern: PointPattern,
    basis: BasisSpec,
    K_max: int | None = None,
    intensity: IntensityModel | None = None,
    exhaustive: bool = False,
) -> tuple[OseFit, CvCurve]:
    """
    Series estimator with K chosen by CV(K).

    Leaving out a pair subtracts its two terms from theta; a leave-out estimate
    g <= 0 at the held-out distance makes CV(K) -inf.
    """
    K_max = K_max or basis.k_max
    pairs = close_pairs(pattern, basis.r_min, basis.upper, intensity)
    if pairs.n_unordered == 0:
        raise InsufficientPairsError(messages.NO_PAIRS)
    terms = ose_terms(pairs, basis, K_max)
    full = terms.sum(axis=0) - constant_projection(basis, K_max)
    rows = pairs.first_of_each()
    values, _, _ = fb_columns(basis, support_argument(basis, pairs.t[rows]), 0, K_max)
    log_rho = pairs.log_rho_i[rows] + pairs.log_rho_j[rows]
    grid = intensity_grid_for(pattern, pairs.intensity)
    integral_intensity = pairs.intensity if grid is None else grid

    def evaluate(K: int) -> float:
        held_out = full[None, :K] - 2.0 * terms[rows, :K]
        g = 1.0 + np.sum(held_out * values[:, :K], axis=1)
        if np.any(g <= 0):
            return -np.inf
        fit = OseFit(full[:K], basis)
        integral = pair_integral(pattern.window, integral_intensity, fit.g, basis.r_min, basis.R)
        return composite_likelihood(log_rho, np.log(g), integral)

    curve = scan_truncation(evaluate, K_max, exhaustive)
    fit = OseFit(theta=full[: curve.selected_k], basis=basis, intensity=pairs.intensity)
    logger.info("series estimator selected K=%d (%s)", curve.selected_k, curve.rule)
    return fit, curve


def epanechnikov(u, h: float) -> np.ndarray:
    u = np.asarray(u, dtype=float) / h
    return np.where(np.abs(u) <= 1.0, 0.75 * (1.0 - u**2) / h, 0.0)


def silverman_bandwidth(distances: np.ndarray) -> float:
    """0.9 min(sd, IQR / 1.34) m^(-1/5)."""
    m = distances.size
    spread = min(np.std(distances), iqr(distances) / 1.34) if m > 1 else 0.0
    if spread <= 0:
        spread = np.std(distances) if m > 1 else 0.0
    return 0.9 * spread * m ** (-0.2) if spread > 0 else 0.0


@dataclass(frozen=True, eq=False)
class KdeFit:
    """
    g(r) = sum over ordered pairs of e k_h(r - t) / (2 pi r).

    At r = 0 the divisor 2 pi t of each pair replaces 2 pi r.

    Attributes:
        bandwidth (float): Kernel half-width h.
        distances (np.ndarray): Unordered pair distances, sorted.
        weights (np.ndarray): Edge weights of those pairs.
        r_min (float): Start of the fitted range.
        R (float): Length of the fitted range.
    """

    bandwidth: float
    distances: np.ndarray
    weights: np.ndarray
    r_min: float
    R: float
    intensity: IntensityModel | None = None
    kernel: str = constants.EPANECHNIKOV
    grid: np.ndarray | None = None
    scores: np.ndarray | None = None

    kind = EstimatorKind.KDE

    def __post_init__(self):
        if not self.bandwidth > 0:
            raise InvalidInputError(messages.BANDWIDTH_NOT_POSITIVE)
        order = np.argsort(self.distances, kind="stable")
        object.__setattr__(self, "distances", np.asarray(self.distances, dtype=float)[order])
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=float)[order])

    def g(self, r):
        value = kde_evaluate(self.distances, self.weights, self.bandwidth, r)
        return float(value) if np.ndim(value) == 0 else value

    def log_g(self, r):
        return _safe_log(self.g(r))


def _moments(distances: np.ndarray, weights: np.ndarray) -> np.ndarray:
    stacked = np.stack([weights, weights * distances, weights * distances**2])
    return np.concatenate([np.zeros((3, 1)), np.cumsum(stacked, axis=1)], axis=1)


def kde_evaluate(distances: np.ndarray, weights: np.ndarray, h: float, r) -> np.ndarray:
    """Kernel sum over sorted unordered pairs, via prefix sums of w, w t and w t^2."""
    r = np.asarray(r, dtype=float)
    flat = r.ravel()
    moments = _moments(distances, weights)
    lo = np.searchsorted(distances, flat - h, side="left")
    hi = np.searchsorted(distances, flat + h, side="right")
    s0, s1, s2 = (moments[:, hi] - moments[:, lo])
    mass = 0.75 / h * (s0 - (flat**2 * s0 - 2.0 * flat * s1 + s2) / h**2)
    positive = flat > 0
    value = np.zeros_like(flat)
    value[positive] = 2.0 * mass[positive] / (constants.SURFACE_AREA * flat[positive])

    near = distances[(distances > 0) & (distances < h)]
    if np.any(~positive) and near.size:
        w = weights[(distances > 0) & (distances < h)]
        value[~positive] = 2.0 * np.sum(w * epanechnikov(near, h) / (constants.SURFACE_AREA * near))
    return np.maximum(value, 0.0).reshape(r.shape)


def _held_out(distances: np.ndarray, weights: np.ndarray, h: float, in_range: np.ndarray) -> np.ndarray:
    """Estimate at each in-range pair distance with that pair left out."""
    t = distances[in_range]
    g = kde_evaluate(distances, weights, h, t)
    own = np.where(t > 0, 2.0 * weights[in_range] * epanechnikov(0.0, h) / (constants.SURFACE_AREA * np.where(t > 0, t, 1.0)), 0.0)
    return g - own


def _kde_cv(
    distances: np.ndarray,
    weights: np.ndarray,
    h: float,
    in_range: np.ndarray,
    log_rho: np.ndarray,
    integral,
) -> float:
    t = distances[in_range]
    held_out = _held_out(distances, weights, h, in_range)
    lo = np.searchsorted(distances, t - h, side="right")
    hi = np.searchsorted(distances, t + h, side="left")
    neighbours = hi - lo - 1
    if np.any(neighbours <= 0):
        return -np.inf
    held_out = np.maximum(held_out, np.finfo(float).tiny)
    fit_integral = integral(lambda r: kde_evaluate(distances, weights, h, r))
    return composite_likelihood(log_rho, np.log(held_out), fit_integral)


def _kde_least_squares(
    distances: np.ndarray,
    weights: np.ndarray,
    h: float,
    in_range: np.ndarray,
    nodes: tuple[np.ndarray, np.ndarray],
) -> float:
    """
    Negated least-squares criterion 2 pi int g_h^2 r dr - 2 sum_ordered e g_h^{-pair}(t).

    Up to a constant it estimates minus the integrated squared error 2 pi int (g_h - g0)^2 r dr.
    Bandwidths leaving g_h non-positive on a quadrature node score -inf, since the
    estimate is compared on the log scale.
    """
    r, w = nodes
    g_nodes = kde_evaluate(distances, weights, h, r)
    if np.any(g_nodes <= 0):
        return -np.inf
    square = constants.SURFACE_AREA * float(np.sum(w * r * g_nodes**2))
    cross = 2.0 * float(np.sum(2.0 * weights[in_range] * _held_out(distances, weights, h, in_range)))
    return cross - square


def kde_fit(
    pattern: PointPattern,
    bandwidth: float | str | None = "auto",
    r_min: float | None = None,
    R: float | None = None,
    intensity: IntensityModel | None = None,
    criterion: str | None = None,
) -> KdeFit:
    """
    Kernel estimate of g0 on [r_min, r_min + R].

    Args:
        pattern (PointPattern): Data.
        bandwidth (float | str | None): Fixed h, or ``"auto"``/None to maximise CV(h) over
            a logarithmic grid of ``KDE_GRID_POINTS`` values spanning
            [KDE_GRID_LOW, KDE_GRID_HIGH] times a Silverman pilot.
        r_min (float | None): Start of the range.
        R (float | None): Length of the range.
        intensity (IntensityModel | None): Intensity model.
        criterion (str | None): ``least-squares`` or ``composite-likelihood``;
            defaults to ``KDE_CV``.

    Returns:
        KdeFit: The fit; in auto mode ``grid`` and ``scores`` hold the CV curve.

    Raises:
        InsufficientPairsError: If no pair lies in range.
        NoFeasibleKError: If no bandwidth on the grid has a finite CV score.
    """
    r_min = settings.SUPPORT_R_MIN if r_min is None else float(r_min)
    R = settings.SUPPORT_R if R is None else float(R)
    criterion = criterion or settings.KDE_CV
    if criterion not in (constants.KDE_LEAST_SQUARES, constants.KDE_COMPOSITE_LIKELIHOOD):
        raise InvalidInputError(messages.UNKNOWN_KDE_CRITERION.format(criterion=criterion))
    window = pattern.window
    core = close_pairs(pattern, r_min, min(r_min + R, window.min_side), intensity)
    if core.n_unordered == 0:
        raise InsufficientPairsError(messages.NO_PAIRS)
    core_rows = core.first_of_each()

    auto = bandwidth is None or bandwidth == "auto"
    if auto:
        pilot = silverman_bandwidth(core.t[core_rows]) or R / 10.0
        grid = pilot * np.geomspace(settings.KDE_GRID_LOW, settings.KDE_GRID_HIGH, settings.KDE_GRID_POINTS)
    else:
        grid = np.array([float(bandwidth)])
        if not grid[0] > 0:
            raise InvalidInputError(messages.BANDWIDTH_NOT_POSITIVE)
    h_max = float(grid.max())

    pairs = close_pairs(pattern, max(0.0, r_min - h_max), min(r_min + R + h_max, window.min_side), intensity)
    rows = pairs.first_of_each()
    order = np.argsort(pairs.t[rows], kind="stable")
    rows = rows[order]
    distances = pairs.t[rows]
    weights = pairs.e[rows]
    if not auto:
        return KdeFit(grid[0], distances, weights, r_min, R, intensity=pairs.intensity)

    in_range = (distances >= r_min) & (distances <= r_min + R)
    if criterion == constants.KDE_LEAST_SQUARES:
        nodes = gauss_legendre(settings.ISE_NODES, r_min, r_min + R)
        scores = np.array([_kde_least_squares(distances, weights, h, in_range, nodes) for h in grid])
    else:
        log_rho = (pairs.log_rho_i[rows] + pairs.log_rho_j[rows])[in_range]
        grid_model = intensity_grid_for(pattern, pairs.intensity)
        integral_intensity = pairs.intensity if grid_model is None else grid_model

        def integral(g_hat) -> float:
            return pair_integral(window, integral_intensity, g_hat, r_min, R)

        scores = np.array([_kde_cv(distances, weights, h, in_range, log_rho, integral) for h in grid])
    if not np.any(np.isfinite(scores)):
        raise NoFeasibleKError(messages.NO_FEASIBLE_BANDWIDTH)
    chosen = float(grid[int(np.argmax(scores))])
    logger.info("kernel estimator bandwidth %.4g by %s (pilot grid %.4g..%.4g)", chosen, criterion, grid[0], grid[-1])
    return KdeFit(chosen, distances, weights, r_min, R, intensity=pairs.intensity, grid=grid, scores=scores)

"""
Composite-likelihood cross-validation over the truncation level K.

Leaving out the pair {u, v} removes two identical rank-1 terms from A, so every
leave-pair-out solution follows from the full inverse by one Sherman-Morrison step.
"""
import logging
import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
from scipy.linalg import cho_solve
from scipy.spatial import cKDTree

from src.conf import constants, messages
from src.conf.config import settings
from src.core.exceptions import (
    InsufficientPairsError,
    InvalidInputError,
    NoFeasibleKError,
    SingularSystemError,
)
from src.core.quadrature import gauss_legendre
from src.entity.models import (
    BasisSpec,
    ConstantIntensity,
    IntensityGrid,
    IntensityModel,
    PointPattern,
    PsiSpec,
    Variant,
    Window,
)
from src.services.basis import build_basis
from src.services.geometry import close_pairs, intensity_grid_for, iso_set_covariance
from src.services.variational import (
    VariationalSystem,
    assemble_system,
    default_psi,
    extend_system,
    solve_beta,
    spd_factor,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class PairDowndate:
    """A system with one unordered pair removed, with its inverse and solution when solved."""

    system: VariationalSystem
    inverse: np.ndarray | None
    beta: np.ndarray | None
    recomputed: bool = False


@dataclass(frozen=True, eq=False)
class LeavePairOut:
    rows: np.ndarray
    beta: np.ndarray
    log_g: np.ndarray
    recomputed: np.ndarray
    feasible: np.ndarray


@dataclass(frozen=True, eq=False)
class CvCurve:
    """
    CV(K) for K = 1..K_max; scores not evaluated are NaN and -inf marks an infeasible K.

    Attributes:
        ks (np.ndarray): Truncation levels.
        scores (np.ndarray): CV(K).
        selected_k (int): Chosen truncation level.
        rule (str): Selection rule that fired.
    """

    ks: np.ndarray
    scores: np.ndarray
    selected_k: int
    rule: str

    @property
    def flagged(self) -> bool:
        return self.rule != constants.SELECTION_FIRST_LOCAL_MAX

    def rows(self) -> list[tuple[int, float]]:
        return [(int(k), float(score)) for k, score in zip(self.ks, self.scores) if not np.isnan(score)]


def system_inverse(system: VariationalSystem) -> np.ndarray:
    factor = spd_factor(system.A)
    return cho_solve(factor, np.eye(system.K))


def downdate_pair(
    system: VariationalSystem,
    pair_id: int,
    solve: bool = True,
    inverse: np.ndarray | None = None,
) -> PairDowndate:
    """
    Remove both orientations of an unordered pair from a system.

    A' = A - 2 w r' r'^T and b' = b - 2 c. With ``solve`` the inverse is updated by
    Sherman-Morrison; when its denominator falls below SMW_DENOMINATOR_FLOOR the
    downdated system is refactored from scratch and the result is flagged.

    Args:
        system (VariationalSystem): Assembled system with contribution records.
        pair_id (int): Unordered pair id.
        solve (bool): Also return the inverse of A' and beta = -A'^{-1} b'.
        inverse (np.ndarray | None): Precomputed inverse of A.

    Returns:
        PairDowndate: The downdated system, and when solved its inverse and beta.

    Raises:
        InvalidInputError: If the pair is not part of the system.
        SingularSystemError: If the downdated system is singular and ``solve`` is set.
    """
    records = system.records
    rows = np.flatnonzero(records.pair_id == pair_id) if records is not None else np.empty(0, dtype=int)
    if rows.size == 0:
        raise InvalidInputError(messages.PAIR_NOT_FOUND.format(pair_id=pair_id))

    weight = records.weight[rows]
    rprime = records.rprime[rows]
    A = system.A - rprime.T @ (rprime * weight[:, None])
    b = system.b - records.b_increment[rows].sum(axis=0)
    downdated = replace(system, A=A, b=b, records=records.without(pair_id))
    if not solve:
        return PairDowndate(downdated, None, None)

    M = system_inverse(system) if inverse is None else inverse
    u = math.sqrt(float(weight.sum())) * rprime[0]
    Mu = M @ u
    denominator = 1.0 - float(u @ Mu)
    if denominator > constants.SMW_DENOMINATOR_FLOOR:
        updated = M + np.outer(Mu, Mu) / denominator
        return PairDowndate(downdated, updated, -updated @ b)

    logger.warning("Sherman-Morrison denominator %.3e for pair %d, refactoring", denominator, pair_id)
    updated = system_inverse(downdated)
    return PairDowndate(downdated, updated, -updated @ b, recomputed=True)


def leave_pair_out(system: VariationalSystem, inverse: np.ndarray | None = None) -> LeavePairOut:
    """
    Leave-pair-out solutions for every unordered pair at once.

    Returns:
        LeavePairOut: One row per unordered pair (ordered by pair id) with beta^{-p}
        and log g^{-p}(t_p); pairs whose downdated system is singular are infeasible.
    """
    records = system.records
    _, rows, counts = np.unique(records.pair_id, return_index=True, return_counts=True)
    M = system_inverse(system) if inverse is None else inverse

    weight = records.weight[rows] * counts
    U = np.sqrt(weight)[:, None] * records.rprime[rows]
    B = system.b[None, :] - counts[:, None] * records.b_increment[rows]
    MU = U @ M
    MB = B @ M
    denominator = 1.0 - np.sum(MU * U, axis=1)
    weak = denominator <= constants.SMW_DENOMINATOR_FLOOR
    safe = np.where(weak, 1.0, denominator)
    beta = -(MB + MU * (np.sum(MU * B, axis=1) / safe)[:, None])

    feasible = np.ones(rows.size, dtype=bool)
    for p in np.flatnonzero(weak):
        A = system.A - np.outer(U[p], U[p])
        try:
            beta[p] = -cho_solve(spd_factor(A), B[p])
        except SingularSystemError:
            beta[p] = np.nan
            feasible[p] = False
    if weak.any():
        logger.debug("%d of %d leave-pair-out systems refactored", int(weak.sum()), rows.size)

    log_g = np.sum(beta * records.rvalue[rows], axis=1)
    return LeavePairOut(rows=rows, beta=beta, log_g=log_g, recomputed=weak, feasible=feasible)


def pair_integral(
    window: Window,
    intensity: ConstantIntensity | IntensityGrid,
    g_hat: Callable[[np.ndarray], np.ndarray],
    r_min: float,
    R: float,
    nodes: int | None = None,
) -> float:
    """
    Integral over W x W of 1[r_min <= |u - v| <= r_min + R] rho(u) rho(v) g(|u - v|).

    A constant intensity reduces it to rho^2 2 pi int t gamma(t) g(t) dt over
    [r_min, r_min + R]; an intensity raster uses the product midpoint rule over its cells.

    Args:
        window (Window): Observation window.
        intensity (ConstantIntensity | IntensityGrid): Intensity model.
        g_hat (Callable): Vectorised pair correlation estimate on [r_min, r_min + R].
        r_min (float): Lower distance.
        R (float): Range length.
        nodes (int | None): Gauss-Legendre nodes; defaults to ``settings.INTEGRAL_NODES``.
    """
    if R <= 0:
        return 0.0
    if isinstance(intensity, ConstantIntensity):
        t, weights = gauss_legendre(nodes or settings.INTEGRAL_NODES, r_min, r_min + R)
        integrand = t * iso_set_covariance(window, t) * np.asarray(g_hat(t), dtype=float)
        return float(intensity.value**2 * constants.SURFACE_AREA * np.dot(weights, integrand))

    xs, ys = intensity.centres()
    gx, gy = np.meshgrid(xs, ys)
    centres = np.column_stack([gx.ravel(), gy.ravel()])
    rho = intensity.values.ravel()
    pairs = cKDTree(centres).query_pairs(r_min + R, output_type="ndarray")
    total = 0.0
    if pairs.size:
        d = np.hypot(*(centres[pairs[:, 0]] - centres[pairs[:, 1]]).T)
        keep = d >= r_min
        a, b = pairs[keep, 0], pairs[keep, 1]
        total += 2.0 * float(np.sum(rho[a] * rho[b] * g_hat(d[keep])))
    if r_min == 0:
        total += float(np.sum(rho**2) * g_hat(np.zeros(1))[0])
    return total * intensity.cell_area**2


def composite_likelihood(log_rho: np.ndarray, log_g: np.ndarray, integral: float) -> float:
    """sum_p [log rho(u) + log rho(v) + log g^{-p}(t_p)] - N log(integral), or -inf when undefined."""
    if not integral > 0 or log_g.size == 0 or not np.all(np.isfinite(log_g)):
        return -np.inf
    return float(np.sum(log_rho + log_g) - log_g.size * math.log(integral))


class CvContext:
    """
    Pairs, intensity and cached variational systems shared by every K of one pattern.

    Systems are extended one basis function at a time, so scanning K = 1, 2, ...
    assembles each column once.
    """

    def __init__(
        self,
        pattern: PointPattern,
        basis: BasisSpec,
        psi: PsiSpec | None = None,
        intensity: IntensityModel | None = None,
        variant: Variant = Variant.EQ9_10,
    ):
        self.pattern = pattern
        self.basis = basis
        self.psi = psi or default_psi(basis)
        self.variant = Variant(variant)
        self.pairs = close_pairs(pattern, basis.r_min, basis.upper, intensity)
        if self.pairs.n_unordered == 0:
            raise InsufficientPairsError(messages.NO_PAIRS)
        self.rows = self.pairs.first_of_each()
        self.log_rho = self.pairs.log_rho_i[self.rows] + self.pairs.log_rho_j[self.rows]
        model = self.pairs.intensity
        grid = intensity_grid_for(pattern, model)
        self.integral_intensity = model if grid is None else grid
        self._systems: dict[int, VariationalSystem] = {}

    @property
    def n_pairs(self) -> int:
        return self.pairs.n_unordered

    def system(self, K: int) -> VariationalSystem:
        if K not in self._systems:
            if K - 1 in self._systems:
                self._systems[K] = extend_system(self._systems[K - 1])
            else:
                self._systems[K] = assemble_system(self.pairs, self.basis, self.psi, K, self.variant)
        return self._systems[K]

    def integral(self, g_hat: Callable[[np.ndarray], np.ndarray]) -> float:
        return pair_integral(
            self.pattern.window, self.integral_intensity, g_hat, self.basis.r_min, self.basis.R
        )


def cv_score(context: CvContext, K: int) -> float:
    """
    CV(K) of the variational estimator, with leave-pair-out fits from downdating.

    Raises:
        InsufficientPairsError: If fewer than K + 1 pairs are in range.
        SingularSystemError: If the full-data system at K is singular.
    """
    if context.n_pairs < K + 1:
        raise InsufficientPairsError(messages.TOO_FEW_PAIRS.format(found=context.n_pairs, k=K))
    system = context.system(K)
    coeffs = solve_beta(system)
    held_out = leave_pair_out(system)
    if not held_out.feasible.all():
        return -np.inf
    return composite_likelihood(context.log_rho, held_out.log_g, context.integral(coeffs.g))


def _is_local_max(values: np.ndarray, K: int) -> bool:
    """Local maximum of CV restricted to K >= 2; K = 2 has no left neighbour."""
    current = values[K - 1]
    if not np.isfinite(current) or current < values[K]:
        return False
    return K == 2 or current >= values[K - 2]


def first_local_max(scores, k_max: int | None = None) -> tuple[int, str]:
    """
    Apply the selection rule to CV(1), CV(2), ...

    Only K >= 2 takes part, so CV(1) is never compared. Returns the smallest K >= 2
    that is a local maximum of CV(2), CV(3), ...: K = 2 on CV(2) >= CV(3), later K on
    CV(K) >= CV(K-1) and CV(K) >= CV(K+1). K_max qualifies on CV(K_max) >= CV(K_max - 1)
    alone, and without any such K the global maximum over K >= 2 is taken.

    Raises:
        NoFeasibleKError: If no CV(K), K >= 2, is finite.
    """
    values = np.asarray(scores, dtype=float)
    values = np.where(np.isnan(values), -np.inf, values)
    n = values.size
    k_max = k_max or n
    for K in range(2, n + 1):
        if K < n and _is_local_max(values, K):
            return K, constants.SELECTION_FIRST_LOCAL_MAX
        if K == n == k_max and np.isfinite(values[K - 1]) and (K == 2 or values[K - 1] >= values[K - 2]):
            return K, constants.SELECTION_BOUNDARY
    tail = values[1:]
    if tail.size == 0 or not np.any(np.isfinite(tail)):
        raise NoFeasibleKError(messages.NO_FEASIBLE_K)
    return int(np.argmax(tail)) + 2, constants.SELECTION_GLOBAL_MAX


def scan_truncation(evaluate: Callable[[int], float], k_max: int, exhaustive: bool = False) -> CvCurve:
    """Evaluate CV(K) upwards from K = 1 and stop at the first local maximum unless exhaustive."""
    if k_max < 2:
        raise InvalidInputError(messages.K_MAX_TOO_SMALL)
    scores = np.full(k_max, np.nan)
    computed = k_max
    for K in range(1, k_max + 1):
        scores[K - 1] = evaluate(K)
        if not exhaustive and K >= 3 and _is_local_max(np.where(np.isnan(scores), -np.inf, scores), K - 1):
            computed = K
            break
    selected, rule = first_local_max(scores[:computed], k_max)
    if rule != constants.SELECTION_FIRST_LOCAL_MAX:
        logger.warning("no interior local maximum of CV(K); %s rule selected K=%d", rule, selected)
    return CvCurve(ks=np.arange(1, k_max + 1), scores=scores, selected_k=selected, rule=rule)


def select_k(
    pattern: PointPattern,
    K_max: int | None = None,
    basis: BasisSpec | None = None,
    psi: PsiSpec | None = None,
    intensity: IntensityModel | None = None,
    variant: Variant = Variant.EQ9_10,
    exhaustive: bool = False,
    context: CvContext | None = None,
) -> CvCurve:
    """
    Choose K for the variational estimator by the first local maximum of CV(K), K >= 2.

    Args:
        pattern (PointPattern): Data.
        K_max (int | None): Largest K considered; defaults to the basis capacity.
        basis (BasisSpec | None): Basis; built from settings when omitted.
        psi (PsiSpec | None): Test-function envelope.
        intensity (IntensityModel | None): Intensity model.
        variant (Variant): Estimating-equation variant.
        exhaustive (bool): Evaluate every K instead of stopping at the first local maximum.
        context (CvContext | None): Reuse cached pairs and systems.

    Returns:
        CvCurve: Scores and the selected K; singular K score -inf.

    Raises:
        InvalidInputError: If K_max < 2 or exceeds the basis capacity.
        InsufficientPairsError: If no pair lies in range.
        NoFeasibleKError: If every K >= 2 is infeasible.
    """
    basis = basis or (context.basis if context is not None else build_basis())
    K_max = K_max or basis.k_max
    if K_max > basis.k_max:
        raise InvalidInputError(messages.BASIS_INDEX_OUT_OF_RANGE)
    if K_max < 2:
        raise InvalidInputError(messages.K_MAX_TOO_SMALL)
    context = context or CvContext(pattern, basis, psi, intensity, variant)

    def evaluate(K: int) -> float:
        try:
            return cv_score(context, K)
        except (SingularSystemError, InsufficientPairsError) as err:
            logger.debug("CV(%d) infeasible: %s", K, err)
            return -np.inf

    curve = scan_truncation(evaluate, K_max, exhaustive)
    logger.info("selected K=%d (%s) from %d pairs", curve.selected_k, curve.rule, context.n_pairs)
    return curve

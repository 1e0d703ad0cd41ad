"""
Closed-form variational estimating equations for a log-linear pair correlation function.

With log g(t) = beta . r(t), r_k(t) = phi_k(t - r_min), the planar estimating
equation is linear in beta, A beta + b = 0, so beta = -A^{-1} b.
"""
import logging
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable, NamedTuple, Protocol

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from src.conf import constants, messages
from src.conf.config import settings
from src.core.exceptions import InvalidInputError, SingularSystemError
from src.core.quadrature import gauss_legendre
from src.entity.models import BasisSpec, IntensityModel, PairList, PointPattern, PsiSpec, Variant
from src.services.basis import expand, fb_columns, fb_matrix, support_argument
from src.services.geometry import close_pairs
from src.services.simulate import true_log_pcf_derivative

logger = logging.getLogger(__name__)


class ResidualVariant(str, Enum):
    """Which variational identity the Monte-Carlo checker evaluates."""

    EQ4 = "eq4"
    EQ6 = "eq6"
    EQ7 = "eq7"


class PsiValues(NamedTuple):
    value: np.ndarray
    derivative: np.ndarray
    over_t: np.ndarray
    derivative_over_t: np.ndarray


def default_psi(basis: BasisSpec) -> PsiSpec:
    return PsiSpec(b=basis.r_min + basis.R)


def psi_eval(spec: PsiSpec, t) -> PsiValues:
    """
    psi(t) = (t/b)^2 (1 - t/b)^2 on [0, b], zero elsewhere, with psi', psi/t and psi'/t.

    The two ratios are evaluated in cancelled form, so t = 0 needs no division.
    """
    t = np.asarray(t, dtype=float)
    b = spec.b
    u = t / b
    inside = (t >= 0.0) & (t <= b)
    one_minus = 1.0 - u
    over_t = np.where(inside, (t / b**2) * one_minus**2, 0.0)
    derivative_over_t = np.where(inside, (2.0 / b**2) * one_minus * (1.0 - 2.0 * u), 0.0)
    return PsiValues(
        value=np.where(inside, u**2 * one_minus**2, 0.0),
        derivative=t * derivative_over_t,
        over_t=over_t,
        derivative_over_t=derivative_over_t,
    )


@dataclass(frozen=True, eq=False)
class ContributionRecords:
    """
    Per-ordered-pair rank-1 contributions: A = sum w r' r'^T and b = sum b_increment.

    Attributes:
        pair_id (np.ndarray): Unordered pair id of every row.
        t (np.ndarray): Pair distance.
        weight (np.ndarray): Scalar weight w of the rank-1 term.
        rvalue (np.ndarray): r(t), shape (rows, K).
        rprime (np.ndarray): r'(t), shape (rows, K).
        b_increment (np.ndarray): Contribution to b, shape (rows, K).
    """

    pair_id: np.ndarray
    t: np.ndarray
    weight: np.ndarray
    rvalue: np.ndarray
    rprime: np.ndarray
    b_increment: np.ndarray

    def without(self, pair_id: int) -> "ContributionRecords":
        keep = self.pair_id != pair_id
        return ContributionRecords(
            self.pair_id[keep], self.t[keep], self.weight[keep],
            self.rvalue[keep], self.rprime[keep], self.b_increment[keep],
        )

    def reassemble(self) -> tuple[np.ndarray, np.ndarray]:
        A = self.rprime.T @ (self.rprime * self.weight[:, None])
        return A, self.b_increment.sum(axis=0)


@dataclass(frozen=True, eq=False)
class VariationalSystem:
    A: np.ndarray
    b: np.ndarray
    basis: BasisSpec
    psi: PsiSpec
    variant: Variant = Variant.EQ9_10
    records: ContributionRecords | None = None
    pairs: PairList | None = None

    @property
    def K(self) -> int:
        return int(self.b.size)


@dataclass(frozen=True, eq=False)
class VseCoefficients:
    """Fitted coefficients; log g(r) = sum_k beta_k phi_k(r - r_min)."""

    beta: np.ndarray
    basis: BasisSpec
    psi: PsiSpec
    variant: Variant = Variant.EQ9_10
    intensity: IntensityModel | None = None

    @property
    def K(self) -> int:
        return int(self.beta.size)

    def log_g(self, r):
        return eval_log_g(self, r)

    def g(self, r):
        return np.exp(eval_log_g(self, r))


def _weights(variant: Variant, e: np.ndarray, psi: PsiValues) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Weight of r' r'^T and the coefficients of r' and r'' in the b increment."""
    if variant == Variant.EQ9_10:
        return e * psi.over_t, e * psi.derivative_over_t, e * psi.over_t
    return e * psi.value, e * (psi.over_t + psi.derivative), e * psi.value


def _columns(system_basis: BasisSpec, psi: PsiSpec, variant: Variant, pairs: PairList, start: int, stop: int):
    s = support_argument(system_basis, pairs.t)
    value, first, second = fb_columns(system_basis, s, start, stop)
    weight, c_first, c_second = _weights(variant, pairs.e, psi_eval(psi, pairs.t))
    increment = c_first[:, None] * first + c_second[:, None] * second
    return weight, value, first, increment


def assemble_system(
    pairs: PairList,
    basis: BasisSpec,
    psi: PsiSpec | None = None,
    K: int = 1,
    variant: Variant = Variant.EQ9_10,
) -> VariationalSystem:
    """
    Build A and b of the planar variational estimating equation.

    Args:
        pairs (PairList): Pairs with distances in [r_min, r_min + R].
        basis (BasisSpec): Basis.
        psi (PsiSpec | None): Test-function envelope; defaults to b = r_min + R.
        K (int): Number of basis functions.
        variant (Variant): ``eq9-10`` weights pairs by psi/t, ``eq11-12`` by psi.

    Returns:
        VariationalSystem: System with per-pair records for downdating.

    Raises:
        InvalidInputError: If K is out of range or a pair lies outside the support.
    """
    psi = psi or default_psi(basis)
    if not 1 <= K <= basis.k_max:
        raise InvalidInputError(messages.BASIS_INDEX_OUT_OF_RANGE)
    weight, value, first, increment = _columns(basis, psi, variant, pairs, 0, K)
    records = ContributionRecords(
        pair_id=pairs.pair_id, t=pairs.t, weight=weight,
        rvalue=value, rprime=first, b_increment=increment,
    )
    A, b = records.reassemble()
    logger.debug("assembled %s system, K=%d, %d ordered pairs", variant.value, K, len(pairs))
    return VariationalSystem(A=A, b=b, basis=basis, psi=psi, variant=variant, records=records, pairs=pairs)


def extend_system(system: VariationalSystem) -> VariationalSystem:
    """Add basis function K + 1 to an assembled system: one new row/column of A and one entry of b."""
    if system.records is None or system.pairs is None:
        raise InvalidInputError(messages.BASIS_INDEX_OUT_OF_RANGE)
    K = system.K
    if K + 1 > system.basis.k_max:
        raise InvalidInputError(messages.BASIS_INDEX_OUT_OF_RANGE)
    weight, value, first, increment = _columns(system.basis, system.psi, system.variant, system.pairs, K, K + 1)
    records = system.records
    cross = records.rprime.T @ (weight * first[:, 0])
    corner = float(np.sum(weight * first[:, 0] ** 2))
    A = np.block([[system.A, cross[:, None]], [cross[None, :], np.array([[corner]])]])
    b = np.append(system.b, increment[:, 0].sum())
    extended = ContributionRecords(
        pair_id=records.pair_id,
        t=records.t,
        weight=records.weight,
        rvalue=np.hstack([records.rvalue, value]),
        rprime=np.hstack([records.rprime, first]),
        b_increment=np.hstack([records.b_increment, increment]),
    )
    return replace(system, A=A, b=b, records=extended)


def condition_estimate(A: np.ndarray) -> float:
    """2-norm condition number of a symmetric matrix, inf when it is not positive definite."""
    if A.size == 0:
        return np.inf
    eigenvalues = np.linalg.eigvalsh(A)
    low, high = eigenvalues[0], eigenvalues[-1]
    if high <= 0 or low <= 0:
        return np.inf
    return float(high / low)


def spd_factor(A: np.ndarray):
    """
    Cholesky factor of A after the condition test.

    Raises:
        SingularSystemError: If the condition estimate exceeds ``settings.CONDITION_LIMIT``.
    """
    condition = condition_estimate(A)
    if condition > settings.CONDITION_LIMIT:
        raise SingularSystemError(condition)
    try:
        return cho_factor(A, lower=True)
    except LinAlgError:
        raise SingularSystemError(np.inf)


def solve_beta(system: VariationalSystem) -> VseCoefficients:
    """
    Solve A beta + b = 0 by Cholesky factorisation.

    Raises:
        SingularSystemError: If A is singular or too ill-conditioned.
    """
    factor = spd_factor(system.A)
    beta = -cho_solve(factor, system.b)
    intensity = system.pairs.intensity if system.pairs is not None else None
    return VseCoefficients(beta=beta, basis=system.basis, psi=system.psi, variant=system.variant, intensity=intensity)


def eval_log_g(coeffs: VseCoefficients, r):
    """
    log g(r) = sum_k beta_k phi_k(r - r_min).

    Raises:
        InvalidInputError: If r lies outside [r_min, r_min + R].
    """
    value = expand(coeffs.basis, coeffs.beta, r)
    return float(value) if np.ndim(value) == 0 else value


def sensitivity(coeffs: VseCoefficients, pcf: Callable[[np.ndarray], np.ndarray], nodes: int | None = None) -> np.ndarray:
    """
    Expected A under a pair correlation function g0 (Campbell formula).

    For ``eq9-10`` this is 2 pi int psi(t) r'(t) r'(t)^T g0(t) dt and for ``eq11-12`` the
    integrand carries an extra factor t. The negated derivative of the stacked
    estimating function is -A, so the sensitivity in that convention is the negative
    of the returned matrix.
    """
    basis = coeffs.basis
    t, weights = gauss_legendre(nodes or settings.SENSITIVITY_NODES, basis.r_min, basis.upper)
    _, first, _ = fb_matrix(basis, coeffs.K, t - basis.r_min)
    integrand = psi_eval(coeffs.psi, t).value * np.asarray(pcf(t), dtype=float)
    if coeffs.variant == Variant.EQ11_12:
        integrand = integrand * t
    return constants.SURFACE_AREA * first.T @ (first * (weights * integrand)[:, None])


class RadialValues(NamedTuple):
    value: np.ndarray
    derivative: np.ndarray
    over_t: np.ndarray
    derivative_over_t: np.ndarray


class RadialTestFunction(Protocol):
    """Radial test function h, differentiable and vanishing at both ends of ``support``."""

    support: tuple[float, float]

    def evaluate(self, t: np.ndarray) -> RadialValues: ...


@dataclass(frozen=True)
class PsiTestFunction:
    psi: PsiSpec

    @property
    def support(self) -> tuple[float, float]:
        return 0.0, self.psi.b

    def evaluate(self, t: np.ndarray) -> RadialValues:
        return RadialValues(*psi_eval(self.psi, t))


@dataclass(frozen=True)
class BasisTestFunction:
    """h(t) = -psi(t) phi_k'(t - r_min), the k-th component of the estimating function at beta = 0."""

    basis: BasisSpec
    psi: PsiSpec
    k: int = 1

    @property
    def support(self) -> tuple[float, float]:
        return self.basis.r_min, min(self.psi.b, self.basis.upper)

    def evaluate(self, t: np.ndarray) -> RadialValues:
        s = support_argument(self.basis, t)
        _, first, second = (column[:, 0] for column in fb_columns(self.basis, s, self.k - 1, self.k))
        psi = psi_eval(self.psi, t)
        return RadialValues(
            value=-psi.value * first,
            derivative=-(psi.derivative * first + psi.value * second),
            over_t=-psi.over_t * first,
            derivative_over_t=-(psi.derivative_over_t * first + psi.over_t * second),
        )


@dataclass(frozen=True)
class ResidualEstimate:
    lhs_mean: float
    rhs_mean: float
    lhs_se: float
    rhs_se: float
    difference_se: float
    replicates: int

    @property
    def difference(self) -> float:
        return self.lhs_mean - self.rhs_mean


def _residual_terms(
    pairs: PairList, h: RadialTestFunction, log_derivative: Callable, variant: ResidualVariant
) -> tuple[float, float]:
    if len(pairs) == 0:
        return 0.0, 0.0
    values = h.evaluate(pairs.t)
    slope = np.asarray(log_derivative(pairs.t), dtype=float)
    e = pairs.e
    if variant == ResidualVariant.EQ6:
        return float(np.sum(e * values.over_t * slope)), float(-np.sum(e * values.derivative_over_t))
    if variant == ResidualVariant.EQ7:
        return float(np.sum(e * values.value * slope)), float(-np.sum(e * (values.over_t + values.derivative)))
    squared = pairs.dx**2 + pairs.dy**2
    lhs = np.sum(e * slope * squared * values.over_t)
    divergence = 2.0 * values.value + pairs.t * values.derivative
    return float(lhs), float(-np.sum(e * divergence))


def variational_residual(
    replicates: list[PointPattern],
    h: RadialTestFunction,
    truth,
    variant: ResidualVariant = ResidualVariant.EQ6,
    intensity: IntensityModel | None = None,
) -> ResidualEstimate:
    """
    Monte-Carlo estimates of both sides of a variational identity.

    ``eq6`` checks E sum e (h/t) (log g0)' = -E sum e h'/t, ``eq7`` checks
    E sum e h (log g0)' = -E sum e (h/t + h'), and ``eq4`` the displacement form
    with the radial field H(w) = h(|w|) w, whose divergence is 2h + t h'.

    Args:
        replicates (list[PointPattern]): Independent realisations.
        h (RadialTestFunction): Radial test function vanishing at the ends of its support.
        truth (ModelSpec | Callable): Model or callable giving (log g0)'(t).
        variant (ResidualVariant): Identity to check.
        intensity (IntensityModel | None): Intensity used for the edge weights.

    Returns:
        ResidualEstimate: Means, standard errors and the paired-difference standard error.
    """
    if callable(truth):
        log_derivative = truth
    else:
        log_derivative = lambda t: true_log_pcf_derivative(truth, t)  # noqa: E731

    lo, hi = h.support
    lhs, rhs = [], []
    for pattern in replicates:
        pairs = close_pairs(pattern, lo, hi, intensity)
        left, right = _residual_terms(pairs, h, log_derivative, ResidualVariant(variant))
        lhs.append(left)
        rhs.append(right)

    lhs = np.asarray(lhs)
    rhs = np.asarray(rhs)
    n = lhs.size
    scale = 1.0 / np.sqrt(n) if n > 1 else np.nan
    ddof = 1 if n > 1 else 0
    return ResidualEstimate(
        lhs_mean=float(lhs.mean()) if n else np.nan,
        rhs_mean=float(rhs.mean()) if n else np.nan,
        lhs_se=float(lhs.std(ddof=ddof) * scale) if n else np.nan,
        rhs_se=float(rhs.std(ddof=ddof) * scale) if n else np.nan,
        difference_se=float((lhs - rhs).std(ddof=ddof) * scale) if n else np.nan,
        replicates=n,
    )

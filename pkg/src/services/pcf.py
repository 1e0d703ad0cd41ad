"""
Estimator façade shared by the HTTP routes, the command line and the benchmark.
"""
import logging
from dataclasses import dataclass

import numpy as np

from src.conf import constants, messages
from src.conf.config import settings
from src.core.exceptions import InvalidInputError, MissingIntensityError
from src.entity.models import (
    ConstantIntensity,
    EstimatorKind,
    IntensityGrid,
    IntensityModel,
    PointPattern,
    PointwiseIntensity,
    PsiSpec,
    RngSeed,
    Variant,
)
from src.schemas.fit import BasisSchema, FitEnvelope, IntensitySchema, KdeSchema, PsiSchema, SelectionSchema
from src.schemas.simulation import ModelSpec
from src.services.baselines import KdeFit, OseFit, kde_fit, ose_fit, ose_select
from src.services.basis import build_basis
from src.services.geometry import close_pairs
from src.services.select import CvContext, CvCurve, select_k
from src.services.simulate import simulate, true_pcf
from src.services.variational import VseCoefficients, assemble_system, default_psi, solve_beta

logger = logging.getLogger(__name__)

Estimate = VseCoefficients | OseFit | KdeFit


def parse_intensity_mode(
    mode: str, pattern: PointPattern, grid: IntensityGrid | None = None
) -> IntensityModel:
    """
    Turn ``constant:<value>``, ``constant:plugin`` or ``column`` into an intensity model.

    Raises:
        InvalidInputError: On an unknown mode or a non-positive value.
        MissingIntensityError: If ``column`` is requested and the pattern has no intensity.
    """
    mode = mode.strip()
    if mode == "column":
        if pattern.intensity is None:
            raise MissingIntensityError(messages.INTENSITY_MISSING)
        return PointwiseIntensity(pattern.intensity, grid)
    kind, _, value = mode.partition(":")
    if kind != "constant" or not value:
        raise InvalidInputError(messages.INTENSITY_SPEC)
    if value == "plugin":
        return ConstantIntensity.plugin(pattern)
    try:
        return ConstantIntensity(float(value))
    except ValueError:
        raise InvalidInputError(messages.INTENSITY_SPEC)


def _intensity_schema(model: IntensityModel | None) -> IntensitySchema | None:
    if isinstance(model, ConstantIntensity):
        return IntensitySchema(kind="constant", value=model.value)
    if isinstance(model, PointwiseIntensity):
        return IntensitySchema(kind="column")
    return None


@dataclass(frozen=True, eq=False)
class PcfFit:
    """A fitted estimator with the range it is valid on and how its smoothing was chosen."""

    kind: EstimatorKind
    estimate: Estimate
    r_min: float
    R: float
    selection: SelectionSchema
    cv: CvCurve | None = None

    @property
    def upper(self) -> float:
        return self.r_min + self.R

    def g(self, r):
        return self.estimate.g(r)

    def log_g(self, r):
        return self.estimate.log_g(r)

    def grid(self, points: int | None = None) -> np.ndarray:
        return np.linspace(self.r_min, self.upper, points or settings.CURVE_POINTS)

    def curve(self, points: int | None = None) -> tuple[np.ndarray, np.ndarray]:
        r = self.grid(points)
        return r, np.asarray(self.g(r), dtype=float)


class PcfService:
    """
    Fits, serialises and evaluates pair correlation estimates.

    Args:
        k_max (int | None): Basis capacity; defaults to ``settings.BASIS_K_MAX``.
    """

    def __init__(self, k_max: int | None = None):
        self.k_max = k_max or settings.BASIS_K_MAX

    def intensity(self, pattern: PointPattern, mode: str, grid: IntensityGrid | None = None) -> IntensityModel:
        return parse_intensity_mode(mode, pattern, grid)

    def fit(
        self,
        pattern: PointPattern,
        estimator: EstimatorKind | str = EstimatorKind.VSE,
        intensity: IntensityModel | str = "constant:plugin",
        r_min: float | None = None,
        R: float | None = None,
        K: int | str = "auto",
        variant: Variant | str = Variant.EQ9_10,
        bandwidth: float | str = "auto",
        exhaustive: bool = False,
    ) -> PcfFit:
        """
        Fit one estimator on [r_min, r_min + R].

        Args:
            pattern (PointPattern): Data.
            estimator (EstimatorKind | str): ``vse``, ``ose`` or ``kde``.
            intensity (IntensityModel | str): Intensity model or mode string.
            r_min (float | None): Start of the range.
            R (float | None): Length of the range.
            K (int | str): Truncation level, or ``auto`` for CV(K) selection.
            variant (Variant | str): Estimating-equation variant of the VSE.
            bandwidth (float | str): KDE bandwidth, or ``auto``.
            exhaustive (bool): Evaluate CV(K) for every K.

        Returns:
            PcfFit: The fit and its selection record.

        Raises:
            InvalidInputError: On malformed input.
            NumericalError: On singular systems, missing pairs or no feasible K.
        """
        estimator = EstimatorKind(estimator)
        model = self.intensity(pattern, intensity) if isinstance(intensity, str) else intensity
        r_min = settings.SUPPORT_R_MIN if r_min is None else float(r_min)
        R = settings.SUPPORT_R if R is None else float(R)

        if estimator == EstimatorKind.KDE:
            fit = kde_fit(pattern, bandwidth, r_min, R, model)
            auto = fit.grid is not None
            selection = SelectionSchema(
                bandwidth=fit.bandwidth,
                rule=constants.SELECTION_GLOBAL_MAX if auto else constants.SELECTION_FIXED,
            )
            return PcfFit(estimator, fit, r_min, R, selection)

        basis = build_basis(R, r_min, self.k_max)
        auto = K is None or K == "auto"
        if not auto and not 1 <= int(K) <= basis.k_max:
            raise InvalidInputError(messages.BASIS_INDEX_OUT_OF_RANGE)

        if estimator == EstimatorKind.OSE:
            if auto:
                fit, curve = ose_select(pattern, basis, intensity=model, exhaustive=exhaustive)
                selection = SelectionSchema(K=fit.K, rule=curve.rule, flagged=curve.flagged)
                return PcfFit(estimator, fit, r_min, R, selection, curve)
            fit = ose_fit(pattern, basis, int(K), model)
            return PcfFit(estimator, fit, r_min, R, SelectionSchema(K=fit.K))

        variant = Variant(variant)
        if auto:
            context = CvContext(pattern, basis, intensity=model, variant=variant)
            curve = select_k(pattern, basis=basis, variant=variant, exhaustive=exhaustive, context=context)
            coefficients = solve_beta(context.system(curve.selected_k))
            selection = SelectionSchema(K=curve.selected_k, rule=curve.rule, flagged=curve.flagged)
            return PcfFit(estimator, coefficients, r_min, R, selection, curve)
        pairs = close_pairs(pattern, basis.r_min, basis.upper, model)
        coefficients = solve_beta(assemble_system(pairs, basis, default_psi(basis), int(K), variant))
        return PcfFit(estimator, coefficients, r_min, R, SelectionSchema(K=coefficients.K))

    def cv_curve(
        self,
        pattern: PointPattern,
        estimator: EstimatorKind | str = EstimatorKind.VSE,
        intensity: IntensityModel | str = "constant:plugin",
        r_min: float | None = None,
        R: float | None = None,
        variant: Variant | str = Variant.EQ9_10,
    ) -> CvCurve:
        """CV(K) for every K up to the basis capacity."""
        estimator = EstimatorKind(estimator)
        if estimator == EstimatorKind.KDE:
            raise InvalidInputError(messages.CV_ESTIMATOR)
        fit = self.fit(pattern, estimator, intensity, r_min, R, "auto", variant, exhaustive=True)
        return fit.cv

    def envelope(self, fit: PcfFit) -> FitEnvelope:
        estimate = fit.estimate
        intensity = _intensity_schema(estimate.intensity)
        if isinstance(estimate, KdeFit):
            kde = KdeSchema(
                bandwidth=estimate.bandwidth,
                kernel=estimate.kernel,
                rmin=estimate.r_min,
                R=estimate.R,
                distances=estimate.distances.tolist(),
                weights=estimate.weights.tolist(),
            )
            return FitEnvelope(kind=fit.kind, kde=kde, intensity=intensity, selection=fit.selection)
        basis = estimate.basis
        basis_schema = BasisSchema(nu=basis.nu, R=basis.R, rmin=basis.r_min, K=estimate.K, k_max=basis.k_max)
        if isinstance(estimate, OseFit):
            return FitEnvelope(
                kind=fit.kind, basis=basis_schema, theta=estimate.theta.tolist(),
                intensity=intensity, selection=fit.selection,
            )
        return FitEnvelope(
            kind=fit.kind,
            basis=basis_schema,
            psi=PsiSchema(b=estimate.psi.b),
            variant=estimate.variant,
            beta=estimate.beta.tolist(),
            intensity=intensity,
            selection=fit.selection,
        )

    def from_envelope(self, envelope: FitEnvelope) -> PcfFit:
        """Rebuild an evaluable fit from its serialised form."""
        intensity = None
        if envelope.intensity is not None and envelope.intensity.kind == "constant":
            intensity = ConstantIntensity(envelope.intensity.value)
        if envelope.kind == EstimatorKind.KDE:
            block = envelope.kde
            estimate = KdeFit(
                block.bandwidth, np.array(block.distances), np.array(block.weights),
                block.rmin, block.R, intensity=intensity, kernel=block.kernel,
            )
            return PcfFit(envelope.kind, estimate, block.rmin, block.R, envelope.selection)

        schema = envelope.basis
        basis = build_basis(schema.R, schema.rmin, schema.k_max or max(schema.K, self.k_max), schema.nu)
        if envelope.kind == EstimatorKind.OSE:
            estimate = OseFit(np.array(envelope.theta), basis, intensity)
        else:
            estimate = VseCoefficients(
                beta=np.array(envelope.beta),
                basis=basis,
                psi=PsiSpec(envelope.psi.b),
                variant=envelope.variant or Variant.EQ9_10,
                intensity=intensity,
            )
        return PcfFit(envelope.kind, estimate, basis.r_min, basis.R, envelope.selection)

    def simulate(self, model: ModelSpec, seed: int = 0, stream: int = 0) -> PointPattern:
        pattern = simulate(model, RngSeed(seed, stream))
        logger.info("simulated %s with %d points (seed %d, stream %d)", model.kind.value, pattern.n, seed, stream)
        return pattern

    def true_pcf(self, model: ModelSpec, r) -> np.ndarray:
        return np.atleast_1d(np.asarray(true_pcf(model, r), dtype=float))

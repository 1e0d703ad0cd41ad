from typing import Literal

from pydantic import BaseModel, Field, PositiveFloat, field_validator, model_validator

from src.conf import constants, messages
from src.conf.config import settings
from src.entity.models import EstimatorKind, Variant
from src.schemas.pattern import WindowSchema


class BasisSchema(BaseModel):
    nu: float = constants.BASIS_ORDER
    R: PositiveFloat
    rmin: float = Field(default=0.0, ge=0.0)
    K: int = Field(ge=1)
    k_max: int | None = Field(default=None, ge=1)


class PsiSchema(BaseModel):
    b: PositiveFloat


class IntensitySchema(BaseModel):
    kind: Literal["constant", "column"]
    value: PositiveFloat | None = None


class SelectionSchema(BaseModel):
    K: int | None = None
    bandwidth: float | None = None
    rule: str = constants.SELECTION_FIXED
    flagged: bool = False


class KdeSchema(BaseModel):
    bandwidth: PositiveFloat
    kernel: str = constants.EPANECHNIKOV
    rmin: float = Field(default=0.0, ge=0.0)
    R: PositiveFloat
    distances: list[float]
    weights: list[float]

    @model_validator(mode="after")
    def check_lengths(self):
        if len(self.distances) != len(self.weights):
            raise ValueError("distances and weights differ in length")
        return self


class FitEnvelope(BaseModel):
    """
    Serialised fit of any estimator, discriminated by ``kind``.

    ``beta`` belongs to ``vse``, ``theta`` to ``ose`` and ``kde`` to ``kde``.
    """

    kind: EstimatorKind
    basis: BasisSchema | None = None
    psi: PsiSchema | None = None
    variant: Variant | None = None
    beta: list[float] | None = None
    theta: list[float] | None = None
    kde: KdeSchema | None = None
    intensity: IntensitySchema | None = None
    selection: SelectionSchema = Field(default_factory=SelectionSchema)

    @model_validator(mode="after")
    def check_payload(self):
        if self.kind == EstimatorKind.VSE and (self.beta is None or self.basis is None or self.psi is None):
            raise ValueError("vse fits need basis, psi and beta")
        if self.kind == EstimatorKind.OSE and (self.theta is None or self.basis is None):
            raise ValueError("ose fits need basis and theta")
        if self.kind == EstimatorKind.KDE and self.kde is None:
            raise ValueError("kde fits need a kde block")
        return self


class FitRequest(BaseModel):
    window: WindowSchema = Field(default_factory=WindowSchema)
    points: list[tuple[float, float]]
    intensity: str = "constant:plugin"
    intensity_values: list[float] | None = None
    estimator: EstimatorKind = EstimatorKind.VSE
    variant: Variant = Variant.EQ9_10
    r_min: float = Field(default=settings.SUPPORT_R_MIN, ge=0.0)
    R: PositiveFloat = settings.SUPPORT_R
    K: int | Literal["auto"] = "auto"
    bandwidth: PositiveFloat | Literal["auto"] = "auto"

    @field_validator("K")
    @classmethod
    def check_k(cls, value):
        if value != "auto" and value < 1:
            raise ValueError(messages.BASIS_INDEX_OUT_OF_RANGE)
        return value


class CurvePoint(BaseModel):
    r: float
    g: float


class FitResponse(BaseModel):
    fit: FitEnvelope
    curve: list[CurvePoint]
    selected_k: int | None = None

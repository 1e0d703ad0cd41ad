from enum import Enum

from pydantic import BaseModel, Field, PositiveFloat, model_validator

from src.conf import constants, messages
from src.schemas.pattern import PatternSchema, WindowSchema


class ModelKind(str, Enum):

    POISSON = "poisson"
    THOMAS = "thomas"
    VARIANCE_GAMMA = "variance-gamma"
    DPP_EXPONENTIAL = "dpp-exponential"


class ModelSpec(BaseModel):
    """
    A point-process model with its parameters.

    ``omega`` is the Gaussian standard deviation for ``thomas`` and the scale eta of
    the variance-gamma kernel; ``nu`` is the variance-gamma shape, with gamma mixing
    shape nu + 1 on the displacement variance.
    """

    kind: ModelKind
    intensity: PositiveFloat | None = None
    kappa: PositiveFloat | None = None
    mu: PositiveFloat | None = None
    omega: PositiveFloat | None = None
    nu: float | None = None
    alpha: PositiveFloat | None = None
    window: WindowSchema = Field(default_factory=WindowSchema)

    @model_validator(mode="after")
    def check_parameters(self):
        if self.kind == ModelKind.POISSON and self.intensity is None:
            self.intensity = constants.DEFAULT_INTENSITY
        if self.kind in (ModelKind.THOMAS, ModelKind.VARIANCE_GAMMA):
            if self.kappa is None or self.mu is None or self.omega is None:
                raise ValueError(messages.KERNEL_INVALID)
            self.intensity = self.kappa * self.mu
        if self.kind == ModelKind.VARIANCE_GAMMA and (self.nu is None or self.nu <= -0.5):
            raise ValueError(messages.KERNEL_INVALID)
        if self.kind == ModelKind.DPP_EXPONENTIAL:
            if self.alpha is None:
                raise ValueError(messages.KERNEL_INVALID)
            if self.intensity is None:
                self.intensity = constants.DEFAULT_INTENSITY
        return self

    @classmethod
    def study_default(cls, kind: ModelKind | str, window: WindowSchema | None = None) -> "ModelSpec":
        """The four models of the simulation study at intensity 200."""
        kind = ModelKind(kind)
        window = window or WindowSchema()
        if kind == ModelKind.THOMAS:
            return cls(kind=kind, kappa=constants.THOMAS_KAPPA, mu=constants.THOMAS_MU,
                       omega=constants.THOMAS_OMEGA, window=window)
        if kind == ModelKind.VARIANCE_GAMMA:
            return cls(kind=kind, kappa=constants.VG_KAPPA, mu=constants.VG_MU,
                       omega=constants.VG_OMEGA, nu=constants.VG_NU, window=window)
        if kind == ModelKind.DPP_EXPONENTIAL:
            return cls(kind=kind, alpha=constants.DPP_ALPHA, intensity=constants.DEFAULT_INTENSITY, window=window)
        return cls(kind=kind, intensity=constants.DEFAULT_INTENSITY, window=window)


class SimulationRequest(BaseModel):
    model: ModelSpec
    seed: int = Field(default=0, ge=0)
    stream: int = Field(default=0, ge=0)


class SimulationResponse(BaseModel):
    count: int
    pattern: PatternSchema


class SimulationSidecar(BaseModel):
    model: ModelSpec
    seed: int
    stream: int
    window: WindowSchema


class PcfValuesResponse(BaseModel):
    kind: ModelKind
    r: list[float]
    g: list[float]

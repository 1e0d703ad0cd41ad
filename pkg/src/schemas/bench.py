from pathlib import Path
from typing import Literal

from pydantic import AliasChoices, BaseModel, Field, PositiveFloat, field_validator, model_validator

from src.conf import constants
from src.conf.config import settings
from src.entity.models import EstimatorKind
from src.schemas.simulation import ModelKind


def _split(value):
    if isinstance(value, str):
        return [item.strip() for item in value.split(",") if item.strip()]
    return value


class BenchCell(BaseModel):
    index: int
    model: ModelKind
    side: PositiveFloat


class BenchConfig(BaseModel):
    """
    Experiment grid of a simulation study.

    Every (model, window side) pair is one cell; cells run ``replicates`` times and
    every listed estimator is fitted to each replicate. ``replicates`` defaults to the
    profile's count (``BENCH_REPLICATES`` for paper, ``BENCH_CI_REPLICATES`` for ci).
    """

    models: list[ModelKind]
    windows: list[PositiveFloat] = Field(default_factory=lambda: [1.0])
    replicates: int | None = Field(default=None, ge=1)
    estimators: list[EstimatorKind] = Field(default_factory=lambda: list(EstimatorKind))
    R: PositiveFloat = Field(default=settings.SUPPORT_R, validation_alias=AliasChoices("R", "r"))
    r_min: float = Field(default=settings.SUPPORT_R_MIN, ge=0.0)
    dpp_r_min: float = Field(default=constants.DPP_R_MIN, ge=0.0)
    intensity: PositiveFloat = constants.DEFAULT_INTENSITY
    k_max: int = Field(default=settings.BASIS_K_MAX, ge=2)
    seed: int = Field(default=0, ge=0)
    workers: int = Field(default=settings.BENCH_WORKERS, ge=1)
    report_csv: Path | None = None
    report_json: Path | None = None
    curves_dir: Path | None = None
    patterns_dir: Path | None = None
    coefficient_k: int | None = Field(default=None, ge=1)
    profile: Literal["paper", "ci"] = "paper"

    @field_validator("models", "windows", "estimators", mode="before")
    @classmethod
    def split_lists(cls, value):
        return _split(value)

    @model_validator(mode="after")
    def check_grid(self):
        if self.replicates is None:
            self.replicates = settings.BENCH_REPLICATES if self.profile == "paper" else settings.BENCH_CI_REPLICATES
        if not self.models or not self.windows or not self.estimators:
            raise ValueError("models, windows and estimators must not be empty")
        for model in self.models:
            if self.upper(model) > min(self.windows):
                raise ValueError("r_min + R exceeds the smallest window side")
        if self.coefficient_k is not None and self.coefficient_k > self.k_max:
            raise ValueError("coefficient_k exceeds k_max")
        return self

    def range_start(self, model: ModelKind) -> float:
        """DPP cells start at ``dpp_r_min`` since log g0 diverges at 0."""
        return max(self.r_min, self.dpp_r_min) if model == ModelKind.DPP_EXPONENTIAL else self.r_min

    def upper(self, model: ModelKind) -> float:
        return self.range_start(model) + self.R

    def cells(self) -> list[BenchCell]:
        grid = [(model, side) for model in self.models for side in self.windows]
        return [BenchCell(index=index, model=model, side=side) for index, (model, side) in enumerate(grid)]


class BenchRow(BaseModel):
    """
    One estimator on one cell.

    ``root_mise_trimmed`` is only set when dropping the largest ISE moves the
    root-MISE by more than ``OUTLIER_RATIO``; ``flagged_selections`` counts fits
    whose selector fell back from the first-local-maximum rule.
    """

    model: ModelKind
    window: float
    estimator: EstimatorKind
    replicates: int
    root_mise: float | None
    root_mise_trimmed: float | None = None
    mean_k: float | None = None
    mean_bandwidth: float | None = None
    na_count: int = 0
    positivity_violations: int = 0
    flagged_selections: int = 0


class CurveSummary(BaseModel):
    """Pointwise mean and 95% envelope of one estimator's curves over a cell's replicates."""

    model: ModelKind
    window: float
    estimator: EstimatorKind
    r: list[float]
    g_est: list[float]
    g_true: list[float]
    g_lower: list[float]
    g_upper: list[float]
    log_g_lower: list[float]
    log_g_upper: list[float]


class CoefficientRow(BaseModel):
    model: ModelKind
    window: float
    replicate: int
    k: int
    beta: float | None
    beta_true: float


class BenchReport(BaseModel):
    rows: list[BenchRow]
    seeds: dict[str, list[int]] = Field(default_factory=dict)
    wall_times: dict[str, float] = Field(default_factory=dict)
    na_reasons: dict[str, list[str]] = Field(default_factory=dict)
    curves: list[CurveSummary] = Field(default_factory=list, exclude=True)
    coefficients: list[CoefficientRow] = Field(default_factory=list, exclude=True)

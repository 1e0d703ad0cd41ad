"""
Replicated simulation study: simulate, fit every estimator, score log g against the truth.
"""
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from src.conf import constants, messages
from src.conf.config import settings
from src.core.exceptions import InvalidInputError, PcfError
from src.core.quadrature import gauss_legendre
from src.entity.models import EstimatorKind, PointPattern, RngSeed, Window
from src.repositories.pattern_repository import PatternRepository
from src.schemas.bench import BenchCell, BenchConfig, BenchReport, BenchRow, CoefficientRow, CurveSummary
from src.schemas.pattern import WindowSchema
from src.schemas.simulation import ModelKind, ModelSpec
from src.services.basis import build_basis, project_log_pcf
from src.services.pcf import PcfService
from src.services.simulate import simulate, true_log_pcf, true_pcf

logger = logging.getLogger(__name__)

STREAM_STRIDE = 1_000_000


def ise(
    log_estimate: Callable[[np.ndarray], np.ndarray],
    log_truth: Callable[[np.ndarray], np.ndarray],
    r_min: float,
    R: float,
    nodes: int | None = None,
) -> float:
    """
    2 pi int (log g_hat(r) - log g0(r))^2 (r - r_min) dr over [r_min, r_min + R].

    Returns NaN when either log is undefined somewhere on the quadrature nodes.
    """
    r, weights = gauss_legendre(nodes or settings.ISE_NODES, r_min, r_min + R)
    with np.errstate(invalid="ignore", divide="ignore"):
        difference = np.asarray(log_estimate(r), dtype=float) - np.asarray(log_truth(r), dtype=float)
    if not np.all(np.isfinite(difference)):
        return math.nan
    return float(constants.SURFACE_AREA * np.dot(weights, difference**2 * (r - r_min)))


def cell_model(config: BenchConfig, cell: BenchCell) -> ModelSpec:
    """Simulation-study parameters on the square window of the cell, rescaled to the configured intensity."""
    window = WindowSchema(x0=0.0, y0=0.0, x1=cell.side, y1=cell.side)
    model = ModelSpec.study_default(cell.model, window)
    if cell.model in (ModelKind.THOMAS, ModelKind.VARIANCE_GAMMA):
        return model.model_copy(update={"mu": config.intensity / model.kappa, "intensity": config.intensity})
    return model.model_copy(update={"intensity": config.intensity})


def pattern_file(directory: Path, cell: BenchCell, replicate: int) -> Path:
    return Path(directory) / f"{cell.model.value}_{cell.side:g}_{replicate:04d}.csv"


@dataclass(frozen=True)
class ReplicateTask:
    cell: BenchCell
    replicate: int
    model: ModelSpec
    estimators: tuple[EstimatorKind, ...]
    r_min: float
    R: float
    k_max: int
    seed: int
    pattern_path: Path | None = None
    curve_points: int | None = None
    coefficient_k: int | None = None

    @property
    def stream(self) -> int:
        return self.cell.index * STREAM_STRIDE + self.replicate


@dataclass
class EstimatorOutcome:
    estimator: EstimatorKind
    ise: float = math.nan
    K: int | None = None
    bandwidth: float | None = None
    flagged: bool = False
    min_g: float | None = None
    curve: np.ndarray | None = None
    beta: np.ndarray | None = None
    elapsed: float = 0.0
    error: str | None = None


@dataclass
class ReplicateResult:
    cell_index: int
    replicate: int
    outcomes: list[EstimatorOutcome] = field(default_factory=list)


def _replicate_pattern(task: ReplicateTask) -> PointPattern:
    if task.model.kind == ModelKind.DPP_EXPONENTIAL:
        if task.pattern_path is None:
            raise InvalidInputError(messages.PATTERNS_DIR_MISSING.format(kind=task.model.kind.value))
        return PatternRepository().read(task.pattern_path, Window.square(task.cell.side))
    return simulate(task.model, RngSeed(task.seed, task.stream))


def _fit_one(service: PcfService, task: ReplicateTask, pattern: PointPattern, estimator: EstimatorKind) -> EstimatorOutcome:
    outcome = EstimatorOutcome(estimator)
    start = time.perf_counter()
    try:
        fit = service.fit(pattern, estimator, "constant:plugin", task.r_min, task.R)
        outcome.K = fit.selection.K
        outcome.bandwidth = fit.selection.bandwidth
        outcome.flagged = fit.selection.flagged
        outcome.ise = ise(fit.log_g, lambda r: true_log_pcf(task.model, r), task.r_min, task.R)
        _, g = fit.curve(task.curve_points)
        outcome.min_g = float(np.min(g))
        if task.curve_points:
            outcome.curve = g
        if task.coefficient_k and estimator == EstimatorKind.VSE:
            fixed = service.fit(pattern, estimator, "constant:plugin", task.r_min, task.R, K=task.coefficient_k)
            outcome.beta = fixed.estimate.beta
    except PcfError as err:
        logger.warning("replicate %d of cell %d, %s: %s", task.replicate, task.cell.index, estimator.value, err)
        outcome.error = str(err)
    outcome.elapsed = time.perf_counter() - start
    return outcome


def run_replicate(task: ReplicateTask) -> ReplicateResult:
    """Simulate (or load) one pattern and fit every estimator; failures become NA outcomes."""
    result = ReplicateResult(task.cell.index, task.replicate)
    try:
        pattern = _replicate_pattern(task)
    except PcfError as err:
        result.outcomes = [EstimatorOutcome(estimator, error=str(err)) for estimator in task.estimators]
        return result
    service = PcfService(task.k_max)
    result.outcomes = [_fit_one(service, task, pattern, estimator) for estimator in task.estimators]
    return result


def _tasks(config: BenchConfig) -> list[ReplicateTask]:
    tasks = []
    for cell in config.cells():
        model = cell_model(config, cell)
        r_min = config.range_start(cell.model)
        logger.info(
            "cell %d: %s on [0, %g]^2, r in [%g, %g], seed %d, streams %d..%d",
            cell.index, cell.model.value, cell.side, r_min, r_min + config.R, config.seed,
            cell.index * STREAM_STRIDE, cell.index * STREAM_STRIDE + config.replicates - 1,
        )
        for replicate in range(config.replicates):
            path = None
            if cell.model == ModelKind.DPP_EXPONENTIAL and config.patterns_dir is not None:
                path = pattern_file(config.patterns_dir, cell, replicate)
            tasks.append(ReplicateTask(
                cell=cell,
                replicate=replicate,
                model=model,
                estimators=tuple(config.estimators),
                r_min=r_min,
                R=config.R,
                k_max=config.k_max,
                seed=config.seed,
                pattern_path=path,
                curve_points=settings.CURVE_POINTS if config.curves_dir is not None else None,
                coefficient_k=config.coefficient_k,
            ))
    return tasks


def _execute(tasks: list[ReplicateTask], workers: int) -> list[ReplicateResult]:
    if workers <= 1:
        return [run_replicate(task) for task in tasks]
    chunksize = max(1, len(tasks) // (workers * 4))
    with ProcessPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(run_replicate, tasks, chunksize=chunksize))


def _root_mise(ises: np.ndarray) -> tuple[float | None, float | None]:
    """Root-MISE over finite ISEs, and the trimmed value when dropping the largest ISE matters."""
    if ises.size == 0:
        return None, None
    root = math.sqrt(float(np.mean(ises)))
    if ises.size < 2:
        return root, None
    trimmed = math.sqrt(float(np.mean(np.sort(ises)[:-1])))
    if abs(root - trimmed) > settings.OUTLIER_RATIO * root:
        return root, trimmed
    return root, None


def _mean(values: list[float]) -> float | None:
    return float(np.mean(values)) if values else None


def _positivity_violations(estimator: EstimatorKind, fitted: list[EstimatorOutcome]) -> int:
    """VSE fits whose curve reaches zero; OSE and KDE zeros surface as NA replicates instead."""
    if estimator != EstimatorKind.VSE:
        return 0
    return sum(1 for outcome in fitted if outcome.min_g is not None and outcome.min_g <= 0)


def _summarise_curves(
    cell: BenchCell, estimator: EstimatorKind, model: ModelSpec, r: np.ndarray, curves: list[np.ndarray]
) -> CurveSummary:
    stack = np.vstack(curves) if curves else np.full((1, r.size), np.nan)
    with np.errstate(divide="ignore", invalid="ignore"):
        logs = np.where(stack > 0, np.log(np.where(stack > 0, stack, 1.0)), np.nan)
        truth = np.asarray(true_pcf(model, r), dtype=float)
        mean = np.nanmean(stack, axis=0)
        lower, upper = np.nanpercentile(stack, [2.5, 97.5], axis=0)
        log_lower, log_upper = np.nanpercentile(logs, [2.5, 97.5], axis=0)
    return CurveSummary(
        model=cell.model, window=cell.side, estimator=estimator, r=r.tolist(),
        g_est=mean.tolist(), g_true=truth.tolist(), g_lower=lower.tolist(), g_upper=upper.tolist(),
        log_g_lower=log_lower.tolist(), log_g_upper=log_upper.tolist(),
    )


def run_benchmark(config: BenchConfig) -> BenchReport:
    """
    Run every cell of the experiment grid.

    Replicate (cell c, repetition i) draws from the stream (seed, c * STREAM_STRIDE + i),
    so the report depends only on the configuration. Replicates run in a process
    pool of ``config.workers`` and are folded in task order.

    Args:
        config (BenchConfig): Experiment grid.

    Returns:
        BenchReport: One row per cell and estimator, plus seeds, wall times, NA
        reasons, and (when configured) curve envelopes and fixed-K coefficients.
    """
    started = time.perf_counter()
    cells = config.cells()
    tasks = _tasks(config)
    results = _execute(tasks, config.workers)
    by_cell: dict[int, list[ReplicateResult]] = {cell.index: [] for cell in cells}
    for result in results:
        by_cell[result.cell_index].append(result)

    rows, curves, coefficients = [], [], []
    wall_times, na_reasons, seeds = {}, {}, {}
    for cell in cells:
        label = f"{cell.model.value}@{cell.side:g}"
        seeds[label] = [config.seed, cell.index * STREAM_STRIDE]
        model = cell_model(config, cell)
        r_min = config.range_start(cell.model)
        cell_results = by_cell[cell.index]
        for position, estimator in enumerate(config.estimators):
            outcomes = [result.outcomes[position] for result in cell_results]
            ises = np.array([outcome.ise for outcome in outcomes])
            finite = ises[np.isfinite(ises)]
            root, trimmed = _root_mise(finite)
            fitted = [outcome for outcome in outcomes if outcome.error is None]
            reasons = sorted({outcome.error for outcome in outcomes if outcome.error is not None})
            if reasons:
                na_reasons[f"{label}/{estimator.value}"] = reasons
            na_count = int(ises.size - finite.size)
            if na_count:
                logger.warning("%s/%s: %d of %d replicates NA", label, estimator.value, na_count, ises.size)
            rows.append(BenchRow(
                model=cell.model,
                window=cell.side,
                estimator=estimator,
                replicates=config.replicates,
                root_mise=root,
                root_mise_trimmed=trimmed,
                mean_k=_mean([outcome.K for outcome in fitted if outcome.K is not None]),
                mean_bandwidth=_mean([outcome.bandwidth for outcome in fitted if outcome.bandwidth is not None]),
                na_count=na_count,
                positivity_violations=_positivity_violations(estimator, fitted),
                flagged_selections=sum(1 for outcome in fitted if outcome.flagged),
            ))
            wall_times[f"{label}/{estimator.value}"] = float(sum(outcome.elapsed for outcome in outcomes))

            if config.curves_dir is not None:
                r = np.linspace(r_min, r_min + config.R, settings.CURVE_POINTS)
                stacked = [outcome.curve for outcome in fitted if outcome.curve is not None]
                curves.append(_summarise_curves(cell, estimator, model, r, stacked))

            if config.coefficient_k and estimator == EstimatorKind.VSE:
                basis = build_basis(config.R, r_min, config.k_max)
                truth = project_log_pcf(basis, config.coefficient_k, lambda r: true_pcf(model, r))
                for result, outcome in zip(cell_results, outcomes):
                    for k in range(config.coefficient_k):
                        beta = None if outcome.beta is None else float(outcome.beta[k])
                        coefficients.append(CoefficientRow(
                            model=cell.model, window=cell.side, replicate=result.replicate,
                            k=k + 1, beta=beta, beta_true=float(truth[k]),
                        ))
        logger.info("cell %s done", label)

    wall_times["total"] = time.perf_counter() - started
    return BenchReport(
        rows=rows, seeds=seeds, wall_times=wall_times, na_reasons=na_reasons,
        curves=curves, coefficients=coefficients,
    )

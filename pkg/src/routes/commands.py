"""
Command line: simulate, fit, cv, bench and pcf-eval.
"""
import logging
from pathlib import Path

import numpy as np
import typer
from pydantic import ValidationError
from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

from src.conf import messages
from src.conf.config import settings
from src.core.depend_service import (
    get_fit_repository,
    get_pattern_repository,
    get_pcf_service,
    get_report_repository,
)
from src.core.exceptions import InvalidInputError, WindowError
from src.entity.models import EstimatorKind, Variant, Window
from src.schemas.pattern import WindowSchema
from src.schemas.simulation import ModelKind, ModelSpec, SimulationSidecar
from src.services.bench import run_benchmark

app = typer.Typer(add_completion=False, no_args_is_help=True, help="Pair correlation function estimation.")
console = Console(stderr=True)


@app.callback()
def configure(verbose: bool = typer.Option(False, "--verbose", "-v", help="Log at DEBUG level.")):
    logging.basicConfig(
        level=logging.DEBUG if verbose else settings.LOG_LEVEL,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=console, show_path=False)],
        force=True,
    )


def parse_window(value: str | None) -> Window | None:
    """``x0,y0,x1,y1`` to a window."""
    if value is None:
        return None
    parts = value.split(",")
    if len(parts) != 4:
        raise WindowError(messages.WINDOW_SPEC)
    try:
        x0, y0, x1, y1 = (float(part) for part in parts)
    except ValueError:
        raise WindowError(messages.WINDOW_SPEC)
    return Window(x0, y0, x1, y1)


def parse_k(value: str) -> int | str:
    if value == "auto":
        return value
    try:
        return int(value)
    except ValueError:
        raise InvalidInputError(messages.BASIS_INDEX_OUT_OF_RANGE)


def parse_bandwidth(value: str) -> float | str:
    if value == "auto":
        return value
    try:
        return float(value)
    except ValueError:
        raise InvalidInputError(messages.BANDWIDTH_NOT_POSITIVE)


@app.command()
def simulate(
    model: ModelKind = typer.Option(..., "--model", help="Point process model."),
    out: Path = typer.Option(..., "--out", help="Pattern CSV to write; a .json sidecar is written next to it."),
    seed: int = typer.Option(0, "--seed", min=0),
    stream: int = typer.Option(0, "--stream", min=0),
    window: str | None = typer.Option(None, "--window", help="x0,y0,x1,y1; defaults to the unit square."),
    intensity: float | None = typer.Option(None, "--intensity", help="Poisson intensity."),
    kappa: float | None = typer.Option(None, "--kappa"),
    mu: float | None = typer.Option(None, "--mu"),
    omega: float | None = typer.Option(None, "--omega"),
    nu: float | None = typer.Option(None, "--nu"),
):
    """Simulate a pattern; unset parameters take the simulation-study defaults."""
    bounds = parse_window(window) or Window(0.0, 0.0, 1.0, 1.0)
    window_schema = WindowSchema.from_entity(bounds)
    overrides = {
        key: value
        for key, value in {"intensity": intensity, "kappa": kappa, "mu": mu, "omega": omega, "nu": nu}.items()
        if value is not None
    }
    defaults = ModelSpec.study_default(model, window_schema).model_dump(exclude={"intensity"})
    try:
        spec = ModelSpec.model_validate({**defaults, **overrides})
    except ValidationError as err:
        raise InvalidInputError(err.errors()[0]["msg"])
    pattern = get_pcf_service().simulate(spec, seed, stream)
    sidecar = SimulationSidecar(model=spec, seed=seed, stream=stream, window=window_schema)
    get_pattern_repository().write(out, pattern, sidecar)
    console.print(f"{pattern.n} points written to {out}")


@app.command()
def fit(
    pattern_path: Path = typer.Argument(..., help="Pattern CSV x,y[,intensity]."),
    window: str | None = typer.Option(None, "--window", help="x0,y0,x1,y1; defaults to the sidecar window."),
    intensity: str = typer.Option("constant:plugin", "--intensity", help="constant:<value>, constant:plugin or column."),
    intensity_grid: Path | None = typer.Option(None, "--intensity-grid", help="Raster CSV x,y,intensity for column mode."),
    estimator: EstimatorKind = typer.Option(EstimatorKind.VSE, "--estimator"),
    r_min: float = typer.Option(settings.SUPPORT_R_MIN, "--r-min"),
    R: float = typer.Option(settings.SUPPORT_R, "--R"),
    K: str = typer.Option("auto", "--K", help="Truncation level or auto."),
    variant: Variant = typer.Option(Variant.EQ9_10, "--variant"),
    bandwidth: str = typer.Option("auto", "--bandwidth", help="KDE bandwidth or auto."),
    out: Path | None = typer.Option(None, "--out", help="Fit JSON; defaults to <pattern>_fit.json."),
    curve: Path | None = typer.Option(None, "--curve", help="Curve CSV; defaults to <pattern>_curve.csv."),
):
    """Fit an estimator and write its JSON envelope and an r,g_est curve."""
    patterns = get_pattern_repository()
    pattern = patterns.read(pattern_path, parse_window(window))
    service = get_pcf_service()
    grid = patterns.read_intensity_grid(intensity_grid, pattern.window) if intensity_grid else None
    model = service.intensity(pattern, intensity, grid)
    result = service.fit(
        pattern, estimator, model, r_min, R, parse_k(K), variant, parse_bandwidth(bandwidth)
    )
    fits = get_fit_repository()
    out = out or pattern_path.with_name(f"{pattern_path.stem}_fit.json")
    curve = curve or pattern_path.with_name(f"{pattern_path.stem}_curve.csv")
    fits.save(out, service.envelope(result))
    fits.write_curve(curve, *result.curve())
    selected = result.selection
    if selected.K is not None:
        console.print(f"{estimator.value}: K = {selected.K} ({selected.rule}){' [flagged]' if selected.flagged else ''}")
    if selected.bandwidth is not None:
        console.print(f"{estimator.value}: bandwidth = {selected.bandwidth:.6g}")
    console.print(f"fit written to {out}, curve to {curve}")


@app.command()
def cv(
    pattern_path: Path = typer.Argument(..., help="Pattern CSV x,y[,intensity]."),
    window: str | None = typer.Option(None, "--window"),
    intensity: str = typer.Option("constant:plugin", "--intensity"),
    estimator: EstimatorKind = typer.Option(EstimatorKind.VSE, "--estimator"),
    r_min: float = typer.Option(settings.SUPPORT_R_MIN, "--r-min"),
    R: float = typer.Option(settings.SUPPORT_R, "--R"),
    variant: Variant = typer.Option(Variant.EQ9_10, "--variant"),
    out: Path = typer.Option(..., "--out", help="CSV K,cv."),
):
    """Write the full CV(K) curve and report the selected K."""
    pattern = get_pattern_repository().read(pattern_path, parse_window(window))
    curve = get_pcf_service().cv_curve(pattern, estimator, intensity, r_min, R, variant)
    get_fit_repository().write_cv(out, curve)
    console.print(f"selected K = {curve.selected_k} ({curve.rule}); CV curve written to {out}")


@app.command()
def bench(config_path: Path = typer.Argument(..., help="KEY=value benchmark configuration.")):
    """Run a simulation study and write its report."""
    reports = get_report_repository()
    config = reports.load_config(config_path)
    report = run_benchmark(config)
    reports.save_report(report, config.report_csv, config.report_json)
    if config.curves_dir is not None:
        reports.save_curves(report, config.curves_dir)
    if config.coefficient_k is not None:
        directory = config.curves_dir or (config.report_csv.parent if config.report_csv else Path("."))
        reports.save_coefficients(report, Path(directory) / "coefficients.csv")

    table = Table(title="root-MISE of log g")
    for column in ("model", "window", "estimator", "root-MISE", "trimmed", "mean K", "NA"):
        table.add_column(column)
    for row in report.rows:
        table.add_row(
            row.model.value,
            f"{row.window:g}",
            row.estimator.value,
            "NA" if row.root_mise is None else f"{row.root_mise:.4f}",
            "" if row.root_mise_trimmed is None else f"{row.root_mise_trimmed:.4f}",
            "" if row.mean_k is None else f"{row.mean_k:.2f}",
            str(row.na_count),
        )
    console.print(table)
    for label, (seed, stream) in report.seeds.items():
        console.print(f"{label}: seed {seed}, first stream {stream}")


@app.command("pcf-eval")
def pcf_eval(
    fit_path: Path = typer.Argument(..., help="Fit JSON written by fit."),
    out: Path = typer.Option(..., "--out", help="Curve CSV r,g_est."),
    points: int = typer.Option(settings.CURVE_POINTS, "--points", min=2),
    truth: ModelKind | None = typer.Option(None, "--truth", help="Add g_true of this model at its default parameters."),
):
    """Evaluate a saved fit on an even grid of its range."""
    service = get_pcf_service()
    result = service.from_envelope(get_fit_repository().load(fit_path))
    r, g = result.curve(points)
    g_true = service.true_pcf(ModelSpec.study_default(truth), r) if truth is not None else None
    get_fit_repository().write_curve(out, r, np.asarray(g), g_true)
    console.print(f"curve written to {out}")

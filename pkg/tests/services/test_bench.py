import math

import numpy as np
import pytest
from pydantic import ValidationError

from src.conf import messages
from src.entity.models import EstimatorKind, RngSeed
from src.repositories.pattern_repository import PatternRepository
from src.schemas.bench import BenchCell, BenchConfig
from src.schemas.simulation import ModelKind
from src.services.bench import (
    EstimatorOutcome,
    ReplicateTask,
    _positivity_violations,
    _root_mise,
    cell_model,
    ise,
    pattern_file,
    run_benchmark,
)
from src.services.simulate import sim_poisson


def test_ise_of_constant_offset():
    # Arrange
    delta, r_min, R = 0.3, 0.01, 0.125

    # Act
    value = ise(lambda r: np.log(r) + delta, np.log, r_min, R)

    # Assert
    assert value == pytest.approx(math.pi * delta**2 * R**2, rel=1e-12)


def test_ise_is_nan_when_log_undefined():
    # Act
    partly_undefined = ise(lambda r: np.where(r > 0.05, 0.0, np.nan), np.zeros_like, 0.0, 0.1)
    truth_undefined = ise(lambda r: np.zeros_like(r), lambda r: np.log(r - r), 0.0, 0.1)

    # Assert
    assert math.isnan(partly_undefined)
    assert math.isnan(truth_undefined)


def test_config_parses_lists():
    # Act
    config = BenchConfig(models="thomas, poisson", windows="1,2", estimators="vse,kde", profile="ci")

    # Assert
    assert config.models == [ModelKind.THOMAS, ModelKind.POISSON]
    assert config.windows == [1.0, 2.0]
    assert config.estimators == [EstimatorKind.VSE, EstimatorKind.KDE]
    assert config.replicates == 100
    assert [cell.index for cell in config.cells()] == [0, 1, 2, 3]
    assert config.cells()[1] == BenchCell(index=1, model=ModelKind.THOMAS, side=2.0)


def test_config_range_checks():
    # Act & Assert
    with pytest.raises(ValidationError):
        BenchConfig(models="poisson", windows="0.1", R=0.125)
    with pytest.raises(ValidationError):
        BenchConfig(models="poisson", k_max=4, coefficient_k=5)
    with pytest.raises(ValidationError):
        BenchConfig(models="", windows="1")
    config = BenchConfig(models="dpp-exponential")
    assert config.range_start(ModelKind.DPP_EXPONENTIAL) == pytest.approx(0.01)
    assert config.range_start(ModelKind.POISSON) == 0.0


def test_cell_model_rescales_offspring():
    # Arrange
    config = BenchConfig(models="thomas", intensity=400.0)

    # Act
    model = cell_model(config, config.cells()[0])

    # Assert
    assert model.intensity == 400.0
    assert model.mu == pytest.approx(400.0 / model.kappa)


def test_replicate_streams_are_distinct():
    # Arrange
    config = BenchConfig(models="poisson,thomas", replicates=3)
    cell = config.cells()[1]

    # Act
    task = ReplicateTask(cell, 2, cell_model(config, cell), (EstimatorKind.VSE,), 0.0, 0.125, 8, 0)

    # Assert
    assert task.stream == 1_000_002


def test_root_mise_trimming():
    # Act
    root, trimmed = _root_mise(np.array([0.01, 0.01, 0.01, 1.0]))

    # Assert
    assert root == pytest.approx(math.sqrt(1.03 / 4))
    assert trimmed == pytest.approx(0.1)
    assert _root_mise(np.array([0.01, 0.011, 0.012]))[1] is None
    assert _root_mise(np.array([])) == (None, None)


def test_positivity_violations_count_only_series_on_log_scale():
    # Arrange
    zero_somewhere = [EstimatorOutcome(EstimatorKind.KDE, ise=0.01, min_g=0.0), EstimatorOutcome(EstimatorKind.KDE, ise=0.02, min_g=0.4)]
    negative_ose = [EstimatorOutcome(EstimatorKind.OSE, min_g=-0.2)]
    vse = [EstimatorOutcome(EstimatorKind.VSE, min_g=0.0), EstimatorOutcome(EstimatorKind.VSE, min_g=0.3), EstimatorOutcome(EstimatorKind.VSE)]

    # Act
    kde_count = _positivity_violations(EstimatorKind.KDE, zero_somewhere)
    ose_count = _positivity_violations(EstimatorKind.OSE, negative_ose)
    vse_count = _positivity_violations(EstimatorKind.VSE, vse)

    # Assert
    assert kde_count == 0
    assert ose_count == 0
    assert vse_count == 1


def _small_config(**overrides):
    options = dict(models="poisson", windows="1", replicates=2, estimators="vse,ose,kde", k_max=6, profile="ci")
    options.update(overrides)
    return BenchConfig(**options)


def test_benchmark_smoke():
    # Act
    report = run_benchmark(_small_config())

    # Assert
    assert [row.estimator for row in report.rows] == [EstimatorKind.VSE, EstimatorKind.OSE, EstimatorKind.KDE]
    assert all(row.replicates == 2 for row in report.rows)
    assert report.seeds == {"poisson@1": [0, 0]}
    assert "total" in report.wall_times
    for row in report.rows:
        assert 0 <= row.na_count <= 2
        assert (row.root_mise is None) == (row.na_count == 2)


def test_kernel_rows_report_no_positivity_violations():
    # Act
    report = run_benchmark(_small_config(replicates=3, estimators="vse,kde"))

    # Assert
    vse, kde = report.rows
    assert vse.positivity_violations == 0
    assert kde.positivity_violations == 0
    assert (kde.root_mise is None) == (kde.na_count == 3)


def test_benchmark_is_deterministic():
    # Act
    first = run_benchmark(_small_config(estimators="vse"))
    second = run_benchmark(_small_config(estimators="vse"))

    # Assert
    assert [row.model_dump() for row in first.rows] == [row.model_dump() for row in second.rows]


def test_benchmark_curves_and_coefficients(tmp_path):
    # Act
    report = run_benchmark(_small_config(estimators="vse", curves_dir=tmp_path, coefficient_k=2))

    # Assert
    assert len(report.curves) == 1
    curve = report.curves[0]
    assert len(curve.r) == len(curve.g_true)
    assert curve.g_true[0] == 1.0
    assert len(report.coefficients) == 4
    assert {row.k for row in report.coefficients} == {1, 2}
    assert all(row.beta_true == pytest.approx(0.0, abs=1e-12) for row in report.coefficients)


def test_dpp_cells_without_patterns_are_na():
    # Act
    report = run_benchmark(BenchConfig(models="dpp-exponential", replicates=2, estimators="vse", k_max=6))

    # Assert
    row = report.rows[0]
    assert row.na_count == 2
    assert row.root_mise is None
    expected = messages.PATTERNS_DIR_MISSING.format(kind="dpp-exponential")
    assert report.na_reasons["dpp-exponential@1/vse"] == [expected]


def test_dpp_cells_read_external_patterns(tmp_path):
    # Arrange
    config = BenchConfig(
        models="dpp-exponential", replicates=2, estimators="kde", k_max=6, patterns_dir=tmp_path
    )
    cell = config.cells()[0]
    for replicate in range(2):
        pattern = sim_poisson(cell_model(config, cell).window.to_entity(), 200.0, RngSeed(9, replicate))
        PatternRepository().write(pattern_file(tmp_path, cell, replicate), pattern)

    # Act
    report = run_benchmark(config)

    # Assert
    assert pattern_file(tmp_path, cell, 1).name == "dpp-exponential_1_0001.csv"
    reasons = report.na_reasons.get("dpp-exponential@1/kde", [])
    assert messages.PATTERNS_DIR_MISSING.format(kind="dpp-exponential") not in reasons


@pytest.mark.slow
def test_parallel_run_matches_serial():
    # Act
    serial = run_benchmark(_small_config(replicates=6, estimators="vse,kde"))
    parallel = run_benchmark(_small_config(replicates=6, estimators="vse,kde", workers=3))

    # Assert
    assert [row.model_dump() for row in serial.rows] == [row.model_dump() for row in parallel.rows]

import json

import pandas as pd
import pytest

from src.core.exceptions import ConfigError
from src.entity.models import EstimatorKind
from src.repositories.report_repository import ReportRepository
from src.schemas.bench import BenchReport, BenchRow, CoefficientRow, CurveSummary
from src.schemas.simulation import ModelKind


@pytest.fixture
def report_repository():
    return ReportRepository()


@pytest.fixture
def report():
    rows = [
        BenchRow(model=ModelKind.THOMAS, window=1.0, estimator=EstimatorKind.VSE, replicates=3,
                 root_mise=0.21, mean_k=4.0, na_count=0),
        BenchRow(model=ModelKind.THOMAS, window=1.0, estimator=EstimatorKind.OSE, replicates=3,
                 root_mise=None, na_count=3),
    ]
    curve = CurveSummary(
        model=ModelKind.THOMAS, window=1.0, estimator=EstimatorKind.VSE, r=[0.0, 0.1],
        g_est=[5.0, 1.0], g_true=[9.1, 1.0], g_lower=[3.0, 0.9], g_upper=[7.0, 1.1],
        log_g_lower=[1.1, -0.1], log_g_upper=[1.9, 0.1],
    )
    coefficient = CoefficientRow(model=ModelKind.THOMAS, window=1.0, replicate=0, k=1, beta=None, beta_true=0.3)
    return BenchReport(
        rows=rows, seeds={"thomas@1": [0, 0]}, wall_times={"total": 1.5},
        na_reasons={"thomas@1/ose": ["No point pairs within the distance range"]},
        curves=[curve], coefficients=[coefficient],
    )


def test_load_config(report_repository, tmp_path):
    # Arrange
    path = tmp_path / "bench.env"
    path.write_text(
        "# small study\n"
        "MODELS=thomas,variance-gamma\n"
        "WINDOWS=1,2\n"
        "REPLICATES=5\n"
        "ESTIMATORS=vse\n"
        "SEED=17\n"
        "R=0.1\n"
        "R_MIN=0.01\n"
        "CURVES_DIR=\n"
        f"REPORT_CSV={tmp_path / 'report.csv'}\n"
    )

    # Act
    config = report_repository.load_config(path)

    # Assert
    assert config.models == [ModelKind.THOMAS, ModelKind.VARIANCE_GAMMA]
    assert config.windows == [1.0, 2.0]
    assert config.replicates == 5
    assert config.seed == 17
    assert config.R == 0.1
    assert config.r_min == 0.01
    assert config.curves_dir is None
    assert config.report_csv == tmp_path / "report.csv"


def test_load_config_reports_bad_key(report_repository, tmp_path):
    path = tmp_path / "bench.env"
    path.write_text("MODELS=thomas\nREPLICATES=zero\n")
    with pytest.raises(ConfigError, match="replicates"):
        report_repository.load_config(path)


def test_load_config_rejects_unknown_model(report_repository, tmp_path):
    path = tmp_path / "bench.env"
    path.write_text("MODELS=strauss\n")
    with pytest.raises(ConfigError):
        report_repository.load_config(path)


def test_load_missing_config(report_repository, tmp_path):
    with pytest.raises(ConfigError):
        report_repository.load_config(tmp_path / "absent.env")


def test_save_report(report_repository, report, tmp_path):
    # Act
    report_repository.save_report(report, tmp_path / "out" / "report.csv", tmp_path / "out" / "report.json")

    # Assert
    text = (tmp_path / "out" / "report.csv").read_text()
    assert text.splitlines()[0].startswith("model,window,estimator,replicates,root_mise")
    assert ",NA," in text.splitlines()[2]
    frame = pd.read_csv(tmp_path / "out" / "report.csv")
    assert frame["root_mise"].isna().tolist() == [False, True]
    document = json.loads((tmp_path / "out" / "report.json").read_text())
    assert document["seeds"] == {"thomas@1": [0, 0]}
    assert "curves" not in document
    assert report_repository.load(tmp_path / "out" / "report.json").rows == report.rows


def test_save_curves(report_repository, report, tmp_path):
    written = report_repository.save_curves(report, tmp_path / "curves")
    assert [path.name for path in written] == ["thomas_1_vse_curve.csv", "thomas_1_vse_envelope.csv"]
    mean = pd.read_csv(written[0])
    assert list(mean.columns) == ["r", "g_est", "g_true"]
    assert list(pd.read_csv(written[1]).columns) == ["r", "g_lower", "g_upper", "log_g_lower", "log_g_upper"]


def test_save_coefficients(report_repository, report, tmp_path):
    path = report_repository.save_coefficients(report, tmp_path / "coefficients.csv")
    assert path.read_text().splitlines()[1] == "thomas,1.0,0,1,NA,0.3"
    assert report_repository.save_coefficients(BenchReport(rows=[]), tmp_path / "none.csv") is None

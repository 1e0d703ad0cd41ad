import json

import numpy as np
import pytest

from src.core.exceptions import InvalidInputError
from src.repositories.fit_repository import FitRepository
from src.schemas.fit import BasisSchema, FitEnvelope, PsiSchema, SelectionSchema
from src.services.select import CvCurve


@pytest.fixture
def fit_repository():
    return FitRepository()


@pytest.fixture
def envelope():
    return FitEnvelope(
        kind="vse",
        basis=BasisSchema(R=0.125, rmin=0.0, K=3, k_max=8),
        psi=PsiSchema(b=0.125),
        variant="eq9-10",
        beta=[0.1234567890123, -0.2, 1e-17],
        intensity={"kind": "constant", "value": 200.0},
        selection=SelectionSchema(K=3, rule="first-local-max"),
    )


def test_save_and_load_envelope(fit_repository, envelope, tmp_path):
    # Act
    path = fit_repository.save(tmp_path / "fit.json", envelope)
    loaded = fit_repository.load(path)

    # Assert
    assert loaded == envelope
    assert loaded.beta == envelope.beta
    assert json.loads(path.read_text())["kind"] == "vse"


def test_load_rejects_incomplete_envelope(fit_repository, tmp_path):
    path = tmp_path / "fit.json"
    path.write_text(json.dumps({"kind": "vse", "beta": [0.1]}))
    with pytest.raises(InvalidInputError, match="not a valid fit envelope"):
        fit_repository.load(path)


def test_load_rejects_garbage(fit_repository, tmp_path):
    path = tmp_path / "fit.json"
    path.write_text("not json")
    with pytest.raises(InvalidInputError):
        fit_repository.load(path)


def test_load_missing_file(fit_repository, tmp_path):
    with pytest.raises(InvalidInputError, match="not found"):
        fit_repository.load(tmp_path / "absent.json")


def test_write_and_read_curve(fit_repository, tmp_path):
    r = np.linspace(0.0, 0.125, 7)
    g = 1.0 + np.exp(-r / 0.02) / 3.0
    path = fit_repository.write_curve(tmp_path / "curve.csv", r, g)
    frame = fit_repository.read_curve(path)
    assert list(frame.columns) == ["r", "g_est"]
    np.testing.assert_array_equal(frame["g_est"].to_numpy(), g)


def test_curve_with_truth(fit_repository, tmp_path):
    r = np.array([0.0, 0.1])
    path = fit_repository.write_curve(tmp_path / "curve.csv", r, np.ones(2), np.full(2, 2.0))
    assert list(fit_repository.read_curve(path).columns) == ["r", "g_est", "g_true"]


def test_write_cv_skips_unevaluated(fit_repository, tmp_path):
    curve = CvCurve(ks=np.arange(1, 6), scores=np.array([1.0, 2.0, -np.inf, np.nan, np.nan]), selected_k=2, rule="first-local-max")
    frame = fit_repository.read_curve(fit_repository.write_cv(tmp_path / "cv.csv", curve))
    assert frame["K"].tolist() == [1, 2, 3]
    assert frame["cv"].iloc[2] == -np.inf


def test_read_missing_curve(fit_repository, tmp_path):
    with pytest.raises(InvalidInputError):
        fit_repository.read_curve(tmp_path / "absent.csv")

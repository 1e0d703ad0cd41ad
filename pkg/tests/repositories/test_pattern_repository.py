import numpy as np
import pytest

from src.core.exceptions import InvalidInputError, PatternFormatError
from src.entity.models import PointPattern, RngSeed, Window
from src.repositories.pattern_repository import PatternRepository
from src.schemas.pattern import WindowSchema
from src.schemas.simulation import ModelKind, ModelSpec, SimulationSidecar
from src.services.simulate import sim_poisson


@pytest.fixture
def pattern_repository():
    return PatternRepository()


def test_write_and_read_pattern(pattern_repository, tmp_path):
    # Arrange
    pattern = sim_poisson(Window.square(1.0), 50.0, RngSeed(3))
    path = tmp_path / "poisson.csv"

    # Act
    pattern_repository.write(path, pattern)
    loaded = pattern_repository.read(path)

    # Assert
    np.testing.assert_array_equal(loaded.x, pattern.x)
    np.testing.assert_array_equal(loaded.y, pattern.y)
    assert loaded.intensity is None
    assert loaded.window == Window(0.0, 0.0, 1.0, 1.0)


def test_sidecar_supplies_window(pattern_repository, tmp_path):
    # Arrange
    window = WindowSchema(x0=0.0, y0=0.0, x1=2.0, y1=2.0)
    model = ModelSpec.study_default(ModelKind.POISSON, window)
    pattern = sim_poisson(window.to_entity(), 20.0, RngSeed(1))
    sidecar = SimulationSidecar(model=model, seed=1, stream=0, window=window)
    path = tmp_path / "wide.csv"

    # Act
    pattern_repository.write(path, pattern, sidecar)
    loaded = pattern_repository.read(path)

    # Assert
    assert pattern_repository.sidecar_path(path).exists()
    assert loaded.window == Window(0.0, 0.0, 2.0, 2.0)
    assert pattern_repository.load(pattern_repository.sidecar_path(path)).seed == 1


def test_explicit_window_wins_over_sidecar(pattern_repository, tmp_path):
    path = tmp_path / "points.csv"
    path.write_text("x,y\n0.5,0.5\n1.5,1.0\n")
    assert pattern_repository.read(path, Window(0.0, 0.0, 3.0, 2.0)).n == 2
    with pytest.raises(InvalidInputError):
        pattern_repository.read(path)


def test_read_intensity_column(pattern_repository, tmp_path):
    path = tmp_path / "weighted.csv"
    path.write_text("x, y, intensity\n0.1,0.2,150\n0.3,0.4,250\n")
    loaded = pattern_repository.read(path)
    np.testing.assert_array_equal(loaded.intensity, [150.0, 250.0])


def test_header_only_file_is_empty_pattern(pattern_repository, tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("x,y\n")
    assert pattern_repository.read(path).n == 0


@pytest.mark.parametrize(
    "content",
    ["a,b\n0.1,0.2\n", "x,y\n0.1,abc\n", "x,y\n0.1,\n", "", "x,y,intensity,extra\n0.1,0.2,3,4\n"],
)
def test_malformed_patterns(pattern_repository, tmp_path, content):
    path = tmp_path / "bad.csv"
    path.write_text(content)
    with pytest.raises(PatternFormatError):
        pattern_repository.read(path)


def test_missing_intensity_value(pattern_repository, tmp_path):
    path = tmp_path / "gap.csv"
    path.write_text("x,y,intensity\n0.1,0.2,\n")
    with pytest.raises(InvalidInputError):
        pattern_repository.read(path)


def test_missing_file(pattern_repository, tmp_path):
    with pytest.raises(PatternFormatError):
        pattern_repository.read(tmp_path / "absent.csv")


def test_write_keeps_intensity(pattern_repository, tmp_path):
    pattern = PointPattern([0.2, 0.8], [0.3, 0.7], Window.square(1.0), intensity=[10.0, 20.0])
    path = pattern_repository.write(tmp_path / "nested" / "p.csv", pattern)
    assert path.read_text().splitlines()[0] == "x,y,intensity"
    np.testing.assert_array_equal(pattern_repository.read(path).intensity, [10.0, 20.0])


def test_read_intensity_grid(pattern_repository, tmp_path):
    # Arrange
    path = tmp_path / "grid.csv"
    rows = ["x,y,intensity"]
    for y, row in zip((0.25, 0.75), ((1.0, 2.0), (3.0, 4.0))):
        for x, value in zip((0.25, 0.75), row):
            rows.append(f"{x},{y},{value}")
    path.write_text("\n".join(rows) + "\n")

    # Act
    grid = pattern_repository.read_intensity_grid(path, Window.square(1.0))

    # Assert
    np.testing.assert_array_equal(grid.values, [[1.0, 2.0], [3.0, 4.0]])


def test_incomplete_intensity_grid(pattern_repository, tmp_path):
    path = tmp_path / "grid.csv"
    path.write_text("x,y,intensity\n0.25,0.25,1\n0.75,0.25,2\n0.25,0.75,3\n")
    with pytest.raises(PatternFormatError):
        pattern_repository.read_intensity_grid(path, Window.square(1.0))

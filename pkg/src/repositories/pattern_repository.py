import logging
from pathlib import Path

import numpy as np
import pandas as pd

from src.conf import messages
from src.core.exceptions import PatternFormatError
from src.entity.models import IntensityGrid, PointPattern, Window
from src.repositories.base import BaseRepository
from src.schemas.simulation import SimulationSidecar

logger = logging.getLogger(__name__)

PATTERN_COLUMNS = (["x", "y"], ["x", "y", "intensity"])


def _numeric(frame: pd.DataFrame) -> pd.DataFrame:
    try:
        frame = frame.apply(pd.to_numeric, errors="raise")
    except (ValueError, TypeError):
        raise PatternFormatError(messages.PATTERN_VALUES)
    if frame.isna().any().any():
        raise PatternFormatError(messages.PATTERN_VALUES)
    return frame


class PatternRepository(BaseRepository[SimulationSidecar]):
    """
    Point patterns as CSV ``x,y[,intensity]`` with an optional JSON sidecar.

    The sidecar sits next to the CSV with a ``.json`` suffix and records the model,
    seed and window of simulated patterns.
    """

    error = PatternFormatError

    def __init__(self):
        super().__init__(SimulationSidecar)

    @staticmethod
    def sidecar_path(path: str | Path) -> Path:
        return Path(path).with_suffix(".json")

    def read(self, path: str | Path, window: Window | None = None) -> PointPattern:
        """
        Load a pattern.

        Args:
            path (str | Path): CSV file.
            window (Window | None): Observation window; taken from the sidecar when
                omitted, else the unit square.

        Returns:
            PointPattern: The pattern, with per-point intensities if the column is present.

        Raises:
            PatternFormatError: On a bad header, non-numeric or missing values.
            InvalidInputError: On points outside the window or non-positive intensity.
        """
        path = Path(path)
        try:
            frame = pd.read_csv(path, skipinitialspace=True, float_precision="round_trip")
        except FileNotFoundError:
            raise PatternFormatError(messages.FILE_NOT_FOUND.format(path=path))
        except pd.errors.EmptyDataError:
            raise PatternFormatError(messages.PATTERN_HEADER)
        if [column.strip() for column in frame.columns] not in PATTERN_COLUMNS:
            raise PatternFormatError(messages.PATTERN_HEADER)
        frame.columns = [column.strip() for column in frame.columns]
        frame = _numeric(frame)

        if window is None:
            sidecar = self.sidecar_path(path)
            window = self.load(sidecar).window.to_entity() if sidecar.exists() else Window(0.0, 0.0, 1.0, 1.0)
        intensity = frame["intensity"].to_numpy(dtype=float) if "intensity" in frame else None
        pattern = PointPattern(
            frame["x"].to_numpy(dtype=float), frame["y"].to_numpy(dtype=float), window, intensity
        )
        logger.debug("read %d points from %s", pattern.n, path)
        return pattern

    def write(self, path: str | Path, pattern: PointPattern, sidecar: SimulationSidecar | None = None) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        columns = {"x": pattern.x, "y": pattern.y}
        if pattern.intensity is not None:
            columns["intensity"] = pattern.intensity
        pd.DataFrame(columns).to_csv(path, index=False)
        if sidecar is not None:
            self.save(self.sidecar_path(path), sidecar)
        return path

    def read_intensity_grid(self, path: str | Path, window: Window) -> IntensityGrid:
        """
        Load a regular raster ``x,y,intensity`` of cell centres covering the window.

        Raises:
            PatternFormatError: If the file is not a complete regular raster.
        """
        try:
            frame = pd.read_csv(path, skipinitialspace=True, float_precision="round_trip")
        except FileNotFoundError:
            raise PatternFormatError(messages.FILE_NOT_FOUND.format(path=path))
        if [column.strip() for column in frame.columns] != ["x", "y", "intensity"]:
            raise PatternFormatError(messages.PATTERN_HEADER)
        frame.columns = ["x", "y", "intensity"]
        frame = _numeric(frame)
        raster = frame.pivot_table(index="y", columns="x", values="intensity", aggfunc="mean").sort_index()
        values = raster.sort_index(axis=1).to_numpy(dtype=float)
        if np.isnan(values).any():
            raise PatternFormatError(messages.PATTERN_VALUES)
        return IntensityGrid(window, values)

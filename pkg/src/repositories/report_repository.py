import logging
from pathlib import Path

import pandas as pd
from dotenv import dotenv_values
from pydantic import ValidationError

from src.conf import messages
from src.core.exceptions import ConfigError
from src.repositories.base import BaseRepository
from src.schemas.bench import BenchConfig, BenchReport

logger = logging.getLogger(__name__)


class ReportRepository(BaseRepository[BenchReport]):
    """Benchmark configuration files and the report, curve and coefficient outputs."""

    error = ConfigError
    message = messages.CONFIG_INVALID

    def __init__(self):
        super().__init__(BenchReport)

    def load_config(self, path: str | Path) -> BenchConfig:
        """
        Parse a ``KEY=value`` configuration file into a :class:`BenchConfig`.

        Keys are case-insensitive; empty values are treated as unset.

        Raises:
            ConfigError: If the file is missing or a key fails validation.
        """
        path = Path(path)
        if not path.is_file():
            raise ConfigError(messages.FILE_NOT_FOUND.format(path=path))
        values = {key.lower(): value for key, value in dotenv_values(path).items() if value not in (None, "")}
        try:
            return BenchConfig.model_validate(values)
        except ValidationError as err:
            first = err.errors()[0]
            location = ".".join(str(part) for part in first["loc"])
            raise ConfigError(messages.CONFIG_INVALID.format(detail=f"{location}: {first['msg']}"))

    def save_report(self, report: BenchReport, csv_path: str | Path | None, json_path: str | Path | None) -> None:
        if csv_path is not None:
            csv_path = Path(csv_path)
            csv_path.parent.mkdir(parents=True, exist_ok=True)
            frame = pd.DataFrame([row.model_dump(mode="json") for row in report.rows])
            frame.to_csv(csv_path, index=False, na_rep="NA")
            logger.info("report written to %s", csv_path)
        if json_path is not None:
            self.save(json_path, report)
            logger.info("report written to %s", json_path)

    @staticmethod
    def save_curves(report: BenchReport, directory: str | Path) -> list[Path]:
        """One mean curve ``r,g_est,g_true`` and one envelope CSV per cell and estimator."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        written = []
        for curve in report.curves:
            stem = f"{curve.model.value}_{curve.window:g}_{curve.estimator.value}"
            mean = pd.DataFrame({"r": curve.r, "g_est": curve.g_est, "g_true": curve.g_true})
            envelope = pd.DataFrame({
                "r": curve.r,
                "g_lower": curve.g_lower,
                "g_upper": curve.g_upper,
                "log_g_lower": curve.log_g_lower,
                "log_g_upper": curve.log_g_upper,
            })
            mean.to_csv(directory / f"{stem}_curve.csv", index=False, na_rep="NA")
            envelope.to_csv(directory / f"{stem}_envelope.csv", index=False, na_rep="NA")
            written += [directory / f"{stem}_curve.csv", directory / f"{stem}_envelope.csv"]
        return written

    @staticmethod
    def save_coefficients(report: BenchReport, path: str | Path) -> Path | None:
        if not report.coefficients:
            return None
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        frame = pd.DataFrame([row.model_dump(mode="json") for row in report.coefficients])
        frame.to_csv(path, index=False, na_rep="NA")
        return path

from pathlib import Path

import numpy as np
import pandas as pd

from src.conf import messages
from src.core.exceptions import InvalidInputError
from src.repositories.base import BaseRepository
from src.schemas.fit import FitEnvelope
from src.services.select import CvCurve


class FitRepository(BaseRepository[FitEnvelope]):
    """Fit JSON envelopes, sampled curves ``r,g_est`` and CV curves ``K,cv``."""

    message = messages.FIT_FORMAT

    def __init__(self):
        super().__init__(FitEnvelope)

    @staticmethod
    def write_curve(path: str | Path, r: np.ndarray, g: np.ndarray, g_true: np.ndarray | None = None) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        columns = {"r": r, "g_est": g}
        if g_true is not None:
            columns["g_true"] = g_true
        pd.DataFrame(columns).to_csv(path, index=False)
        return path

    @staticmethod
    def read_curve(path: str | Path) -> pd.DataFrame:
        try:
            return pd.read_csv(path, float_precision="round_trip")
        except FileNotFoundError:
            raise InvalidInputError(messages.FILE_NOT_FOUND.format(path=path))

    @staticmethod
    def write_cv(path: str | Path, curve: CvCurve) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        pd.DataFrame(curve.rows(), columns=["K", "cv"]).to_csv(path, index=False)
        return path

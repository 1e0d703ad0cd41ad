from functools import lru_cache

from src.repositories.fit_repository import FitRepository
from src.repositories.pattern_repository import PatternRepository
from src.repositories.report_repository import ReportRepository
from src.services.pcf import PcfService


@lru_cache
def get_pcf_service() -> PcfService:
    return PcfService()


def get_pattern_repository() -> PatternRepository:
    return PatternRepository()


def get_fit_repository() -> FitRepository:
    return FitRepository()


def get_report_repository() -> ReportRepository:
    return ReportRepository()

import logging

from fastapi import APIRouter, Depends, status

from src.core.depend_service import get_pcf_service
from src.entity.models import PointPattern
from src.schemas.fit import CurvePoint, FitRequest, FitResponse
from src.services.pcf import PcfService

router = APIRouter(prefix="/fits", tags=["fits"])
logger = logging.getLogger("uvicorn.error")


@router.post("/", response_model=FitResponse, status_code=status.HTTP_201_CREATED)
def create_fit(body: FitRequest, service: PcfService = Depends(get_pcf_service)):
    """
    Fit a pair correlation estimate to the posted pattern.

    Returns the serialised fit, its curve on ``CURVE_POINTS`` distances of
    [r_min, r_min + R] and the selected truncation level.
    """
    x = [point[0] for point in body.points]
    y = [point[1] for point in body.points]
    pattern = PointPattern(x, y, body.window.to_entity(), body.intensity_values)
    fit = service.fit(
        pattern,
        estimator=body.estimator,
        intensity=body.intensity,
        r_min=body.r_min,
        R=body.R,
        K=body.K,
        variant=body.variant,
        bandwidth=body.bandwidth,
    )
    r, g = fit.curve()
    logger.info("%s fit on %d points, selection %s", fit.kind.value, pattern.n, fit.selection.rule)
    return FitResponse(
        fit=service.envelope(fit),
        curve=[CurvePoint(r=float(radius), g=float(value)) for radius, value in zip(r, g)],
        selected_k=fit.selection.K,
    )

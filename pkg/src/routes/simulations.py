import logging

import numpy as np
from fastapi import APIRouter, Depends, Query, status

from src.core.depend_service import get_pcf_service
from src.schemas.pattern import PatternSchema
from src.schemas.simulation import (
    ModelKind,
    ModelSpec,
    PcfValuesResponse,
    SimulationRequest,
    SimulationResponse,
)
from src.services.pcf import PcfService

router = APIRouter(prefix="/simulations", tags=["simulations"])
logger = logging.getLogger("uvicorn.error")


@router.post("/", response_model=SimulationResponse, status_code=status.HTTP_201_CREATED)
def create_simulation(body: SimulationRequest, service: PcfService = Depends(get_pcf_service)):
    pattern = service.simulate(body.model, body.seed, body.stream)
    return SimulationResponse(count=pattern.n, pattern=PatternSchema.from_entity(pattern))


@router.get("/pcf", response_model=PcfValuesResponse)
def get_true_pcf(
    kind: ModelKind = Query(...),
    r: list[float] = Query(..., description="Distances at which g0 is evaluated"),
    service: PcfService = Depends(get_pcf_service),
):
    """Theoretical pair correlation of a model at its default parameters."""
    model = ModelSpec.study_default(kind)
    values = service.true_pcf(model, np.asarray(r, dtype=float))
    return PcfValuesResponse(kind=kind, r=r, g=values.tolist())

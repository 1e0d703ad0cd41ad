import logging

from fastapi import FastAPI, HTTPException, Request, status
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from src.core.bessel import bessel_j01, bessel_zero
from src.core.exceptions import PcfError
from src.routes import fits, simulations

logger = logging.getLogger("uvicorn.error")

app = FastAPI(
    title="Pair Correlation Estimation Service",
    version="1.0",
)


@app.exception_handler(PcfError)
async def pcf_error_handler(request: Request, exc: PcfError):
    logger.warning("%s: %s", type(exc).__name__, exc)
    return JSONResponse(
        status_code=status.HTTP_422_UNPROCESSABLE_ENTITY,
        content={"error": str(exc), "kind": type(exc).__name__},
    )


app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

app.include_router(fits.router, prefix="/api")
app.include_router(simulations.router, prefix="/api")


@app.get("/")
def read_root(request: Request):
    return {"message": "Pair Correlation Estimation Service v1.0"}


@app.get("/api/healthchecker")
def healthchecker():
    try:
        j0, _ = bessel_j01(bessel_zero(0, 1))
    except PcfError as e:
        logger.error("Bessel smoke check failed: %s", e)
        raise HTTPException(
            status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
            detail="Numerical core is not working",
        )
    if abs(float(j0)) > 1e-12:
        raise HTTPException(
            status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
            detail="Numerical core is not configured correctly",
        )
    return {"message": "Welcome to FastAPI!"}

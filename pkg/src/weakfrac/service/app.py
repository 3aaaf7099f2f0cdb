"""FastAPI front end for the fractional-calculus engine.

Run with `weakfrac serve` or `uvicorn weakfrac.service.app:app`.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..errors import InputError, NonConvergenceError, UsageError
from ..suites import suite_names
from .handlers import run_compute, run_dist_apply, run_verify
from .models import (
    ComputeRequest,
    ComputeResponse,
    DistApplyRequest,
    DistApplyResponse,
    ReportModel,
    VerifyRequest,
)

app = FastAPI(
    title="weakfrac",
    version=__version__,
    description="Fractional integrals/derivatives and identity-verification suites",
)


def _http_error(exc: Exception) -> HTTPException:
    if isinstance(exc, NonConvergenceError):
        return HTTPException(
            status_code=500,
            detail={"code": "non-convergence", "message": str(exc),
                    "achieved_error": exc.achieved_error},
        )
    if isinstance(exc, InputError):
        return HTTPException(status_code=400, detail={"code": "input", "message": str(exc)})
    return HTTPException(status_code=400, detail={"code": "usage", "message": str(exc)})


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "version": __version__}


@app.get("/suites")
def suites() -> dict:
    return {"suites": suite_names()}


@app.post("/compute", response_model=ComputeResponse)
def compute(req: ComputeRequest) -> ComputeResponse:
    try:
        return run_compute(req)
    except (UsageError, InputError, NonConvergenceError) as exc:
        raise _http_error(exc)


@app.post("/verify", response_model=ReportModel)
def verify(req: VerifyRequest) -> ReportModel:
    try:
        return run_verify(req)
    except (UsageError, InputError, NonConvergenceError) as exc:
        raise _http_error(exc)


@app.post("/dist-apply", response_model=DistApplyResponse)
def dist_apply(req: DistApplyRequest) -> DistApplyResponse:
    """Evaluate a distribution descriptor's action on a bump test function.

    Relative CSV paths inside 'regular' descriptors resolve on the server.
    """
    try:
        return run_dist_apply(req)
    except (UsageError, InputError, NonConvergenceError) as exc:
        raise _http_error(exc)

from .models import (
    CaseModel,
    ComputeRequest,
    ComputeResponse,
    DistApplyRequest,
    DistApplyResponse,
    ProbeModel,
    ReportModel,
    Series,
    VerifyRequest,
)
from .handlers import run_compute, run_dist_apply, run_verify

__all__ = [
    "CaseModel",
    "ComputeRequest",
    "ComputeResponse",
    "DistApplyRequest",
    "DistApplyResponse",
    "ProbeModel",
    "ReportModel",
    "Series",
    "VerifyRequest",
    "run_compute",
    "run_dist_apply",
    "run_verify",
]

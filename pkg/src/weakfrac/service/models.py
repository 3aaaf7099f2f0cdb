"""Pydantic request/response models for the compute/verify service.

The JSON report schema mirrors the CLI's: {"suite", "alpha", "cases": [
{"name", "residual", "tolerance", "measured_order", "pass", "warnings"}]}.
"""

from __future__ import annotations

import math
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

ComputeOp = Literal[
    "integral",
    "rl-deriv",
    "caputo-deriv",
    "fourier-deriv",
    "weak-deriv",
    "decompose",
]


class Series(BaseModel):
    """A sampled function: strictly increasing nodes and their values."""

    x: list[float]
    value: list[float]

    @model_validator(mode="after")
    def _check(self) -> "Series":
        if len(self.x) != len(self.value):
            raise ValueError("x and value must have the same length")
        if len(self.x) < 3:
            raise ValueError("need at least 3 samples")
        if any(b <= a for a, b in zip(self.x[:-1], self.x[1:])):
            raise ValueError("x must be strictly increasing")
        if any(not math.isfinite(v) for v in self.x):
            raise ValueError("nodes must be finite")
        return self


class ComputeRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    op: ComputeOp
    direction: Literal["left", "right"] = "left"
    alpha: Optional[float] = None
    sigma: Optional[float] = None
    series: Series
    #: half-width X of a truncation window for data meant as a sample of a
    #: whole-line function; reports the discarded-tail bound
    window: Optional[float] = None

    @field_validator("alpha", "sigma")
    @classmethod
    def _finite(cls, v):
        if v is not None and not math.isfinite(v):
            raise ValueError("order must be finite")
        return v


class ComputeResponse(BaseModel):
    series: Series
    warnings: list[str] = Field(default_factory=list)


class VerifyRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    suite: str
    alpha: float = 0.5
    n: Optional[int] = None
    tol: Optional[float] = None
    m: Optional[int] = None  # expansion-depth override (product suite)


class ProbeModel(BaseModel):
    center: float
    radius: float
    amplitude: float = 1.0


class DistApplyRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    descriptor: dict
    probe: ProbeModel


class DistApplyResponse(BaseModel):
    action: float


class CaseModel(BaseModel):
    name: str
    residual: float
    tolerance: float
    measured_order: Optional[float] = None
    passed: bool = Field(alias="pass")
    warnings: list[str] = Field(default_factory=list)

    model_config = ConfigDict(populate_by_name=True)


class ReportModel(BaseModel):
    suite: str
    alpha: float
    cases: list[CaseModel]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.cases)

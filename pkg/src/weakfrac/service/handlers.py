"""Service-layer handlers shared by the HTTP app and the CLI thin client.

All operator plumbing lives here so both front ends validate, compute, and
serialize identically.
"""

from __future__ import annotations

import warnings

import numpy as np

from ..derivatives import caputo_derivative, fourier_derivative, rl_derivative
from ..distributions import descriptor_to_distribution
from ..errors import UsageError
from ..grid import Grid, GridFunction, GridKind, Interval
from ..rules import decompose_high_order
from ..integrals import rl_integral, truncation_tail_bound
from ..suites import run_suite
from ..weak import TestFunction, weak_derivative_compute
from .models import (
    ComputeRequest,
    ComputeResponse,
    DistApplyRequest,
    DistApplyResponse,
    ReportModel,
    Series,
    VerifyRequest,
)


def _grid_function(series: Series) -> GridFunction:
    nodes = np.asarray(series.x, dtype=float)
    grid = Grid(Interval(float(nodes[0]), float(nodes[-1])), nodes, GridKind.EXPLICIT)
    return GridFunction(grid, np.asarray(series.value, dtype=float), allow_nan=True)


def _series(gf: GridFunction) -> Series:
    return Series(x=[float(v) for v in gf.grid.nodes], value=[float(v) for v in gf.values])


def _need(value, flag: str):
    if value is None:
        raise UsageError(f"operator requires --{flag}")
    return value


def run_compute(req: ComputeRequest) -> ComputeResponse:
    u = _grid_function(req.series)
    notes: list[str] = []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        if req.op == "integral":
            out = rl_integral(u, req.direction, _need(req.sigma, "sigma"))
        elif req.op == "rl-deriv":
            alpha = _need(req.alpha, "alpha")
            if not 0.0 < alpha < 1.0:
                raise UsageError(
                    "rl-deriv supports 0 < alpha < 1; for 1 < alpha < 2 use --op decompose"
                )
            out = rl_derivative(u, req.direction, alpha)
        elif req.op == "caputo-deriv":
            out = caputo_derivative(u, req.direction, _need(req.alpha, "alpha"))
        elif req.op == "fourier-deriv":
            out = fourier_derivative(u, _need(req.alpha, "alpha"))
        elif req.op == "weak-deriv":
            result = weak_derivative_compute(u, req.direction, _need(req.alpha, "alpha"))
            out = result.values
            if result.suspect_non_ac:
                notes.append(
                    "suspect-non-AC (heuristic): total variation of the lifted "
                    f"integrand grows under refinement, ratios {result.tv_ratios}"
                )
        elif req.op == "decompose":
            out = decompose_high_order(u, req.direction, _need(req.alpha, "alpha"))
        else:  # pragma: no cover - pydantic restricts op values
            raise UsageError(f"unknown op {req.op!r}")
    notes.extend(str(w.message) for w in caught)
    if np.any(np.isnan(out.values)):
        notes.append("NaN rows mark the excluded singular node(s)")
    if req.window is not None:
        notes.append(_window_tail_note(req, u))
    return ComputeResponse(series=_series(out), warnings=notes)


def _window_tail_note(req: ComputeRequest, u: GridFunction) -> str:
    """Bound on the contribution a [-X, X] truncation discards, from the
    declared support of the data (its nonzero extent)."""
    if req.op == "integral" and req.sigma is not None:
        sigma = min(req.sigma, 1.0)
    elif req.alpha is not None:
        frac = req.alpha - int(req.alpha)
        sigma = 1.0 - frac if frac > 0 else 1.0
    else:
        sigma = 1.0
    finite = np.nan_to_num(u.values, nan=0.0)
    sup_f = float(np.max(np.abs(finite)))
    nz = np.flatnonzero(np.abs(finite) > 1e-300)
    extent = float(np.max(np.abs(u.grid.nodes[nz]))) if nz.size else 0.0
    gap = max(0.0, req.window - extent)
    bound = truncation_tail_bound(sup_f, gap, sigma)
    return (
        f"truncation window X={req.window:g}: discarded-tail bound "
        f"{bound:.3e} (sup|f| {sup_f:.3g}, support gap {gap:.3g}, order {sigma:g})"
    )


def run_verify(req: VerifyRequest) -> ReportModel:
    extra = {}
    if req.m is not None:
        if req.suite != "product":
            raise UsageError("--m only applies to the product suite")
        extra["m_max"] = req.m
    report = run_suite(req.suite, alpha=req.alpha, n=req.n, tol=req.tol, **extra)
    return ReportModel.model_validate(report.to_json())


def run_dist_apply(req: DistApplyRequest, base_dir: str = ".") -> DistApplyResponse:
    distribution = descriptor_to_distribution(req.descriptor, base_dir)
    probe = TestFunction(req.probe.center, req.probe.radius, req.probe.amplitude)
    return DistApplyResponse(action=distribution.apply(probe))

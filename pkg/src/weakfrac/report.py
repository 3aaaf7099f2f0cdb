"""Verification reports: per-identity residuals, tolerances, and convergence
orders, serialized deterministically for CI consumption."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

__all__ = ["CaseResult", "SuiteReport", "measured_order"]


def measured_order(residual_coarse: float, residual_fine: float) -> float | None:
    """Convergence order log2(r_coarse / r_fine) for one mesh halving."""
    if residual_coarse <= 0.0 or residual_fine <= 0.0:
        return None
    return math.log2(residual_coarse / residual_fine)


@dataclass(frozen=True)
class CaseResult:
    name: str
    residual: float
    tolerance: float
    measured_order: float | None = None
    warnings: tuple[str, ...] = ()

    @property
    def passed(self) -> bool:
        return math.isfinite(self.residual) and self.residual <= self.tolerance

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "residual": self.residual,
            "tolerance": self.tolerance,
            "measured_order": self.measured_order,
            "pass": self.passed,
            "warnings": list(self.warnings),
        }


@dataclass(frozen=True)
class SuiteReport:
    suite: str
    alpha: float
    cases: tuple[CaseResult, ...] = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.cases)

    def sorted_cases(self) -> tuple[CaseResult, ...]:
        return tuple(sorted(self.cases, key=lambda c: c.name))

    def to_json(self) -> dict:
        return {
            "suite": self.suite,
            "alpha": self.alpha,
            "cases": [c.to_json() for c in self.sorted_cases()],
        }

    def dumps(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_json(), indent=indent)

    def summary_lines(self) -> list[str]:
        lines = []
        for c in self.sorted_cases():
            status = "PASS" if c.passed else "FAIL"
            order = f" order={c.measured_order:.2f}" if c.measured_order is not None else ""
            lines.append(
                f"[{status}] {self.suite}/{c.name}: residual={c.residual:.3e} "
                f"tol={c.tolerance:.3e}{order}"
            )
            for w in c.warnings:
                lines.append(f"         warning: {w}")
        return lines

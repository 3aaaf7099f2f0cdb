"""Distributions as symbolic actions on test functions, with weak fractional
derivatives.

Because one-sided derivatives push a test function's support out of the
standard test space, a distribution cannot eat D^alpha phi directly.  Two
extensions are implemented: a smooth cutoff that is identically 1 on the
support of a compactly supported distribution, and a partition-of-unity sum
for general ones.  Actions compose exactly; nothing here is gridded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from .integrals import quad

from .derivatives import fourier_derivative
from .errors import DomainError, UsageError
from .grid import GridKind, Interval, make_grid, sample
from .special import Direction
from .weak import TestFunction, TestFunctionSum, test_deriv

__all__ = [
    "SmoothCutoff",
    "PartitionOfUnity",
    "Distribution",
    "DeltaDistribution",
    "RegularDistribution",
    "DerivedDistribution",
    "dist_apply",
    "dist_frac_derivative_compact",
    "dist_frac_derivative_general",
    "dist_fourier_derivative",
    "dist_consistency_limit",
]


def _smoothstep(t):
    """C-infinity ramp: 0 for t <= 0, 1 for t >= 1."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    out[t >= 1.0] = 1.0
    mid = (t > 0.0) & (t < 1.0)
    tm = t[mid]
    lo = np.exp(-1.0 / tm)
    hi = np.exp(-1.0 / (1.0 - tm))
    out[mid] = lo / (lo + hi)
    return out


@dataclass(frozen=True)
class SmoothCutoff:
    """Smooth function equal to 1 on [lo, hi], supported in [lo-margin, hi+margin]."""

    lo: float
    hi: float
    margin: float

    def __post_init__(self) -> None:
        if not (self.lo <= self.hi and self.margin > 0):
            raise UsageError("cutoff needs lo <= hi and a positive margin")

    @property
    def support(self) -> tuple[float, float]:
        return (self.lo - self.margin, self.hi + self.margin)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        up = _smoothstep((x - (self.lo - self.margin)) / self.margin)
        down = _smoothstep(((self.hi + self.margin) - x) / self.margin)
        out = up * down
        return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class PartitionOfUnity:
    """psi_j(x) = S(x - c_j) - S(x - c_{j+1}) with c_j = origin + j*overlap.

    Each member is supported in an interval of length 2*overlap, consecutive
    members overlap by half, and the sum telescopes to exactly 1 on any
    compact set (finitely many nonzero terms per point).
    """

    origin: float = 0.0
    overlap: float = 1.0

    def __post_init__(self) -> None:
        if self.overlap <= 0:
            raise UsageError("partition spacing must be positive")

    def center(self, j: int) -> float:
        return self.origin + j * self.overlap

    def member(self, j: int) -> Callable:
        cj, cj1, ov = self.center(j), self.center(j + 1), self.overlap

        def psi(x):
            x = np.asarray(x, dtype=float)
            out = _smoothstep((x - cj) / ov) - _smoothstep((x - cj1) / ov)
            return float(out) if out.ndim == 0 else out

        return psi

    def member_support(self, j: int) -> tuple[float, float]:
        return (self.center(j), self.center(j) + 2.0 * self.overlap)

    def members_covering(self, lo: float, hi: float) -> list[int]:
        j_lo = int(math.floor((lo - self.origin) / self.overlap)) - 1
        j_hi = int(math.ceil((hi - self.origin) / self.overlap))
        return list(range(j_lo, j_hi + 1))


class Distribution:
    """A linear action on test functions, with support metadata."""

    #: interval hull of the support; +-inf for one-side-unbounded supports
    support: tuple[float, float]

    def apply(self, phi) -> float:  # pragma: no cover - interface
        raise NotImplementedError

    def _apply_extended(self, func: Callable, func_support: tuple[float, float]) -> float:
        """Action on a smooth (not necessarily admissible) compactly supported
        function; used internally for cutoff-multiplied derivative inputs."""
        raise NotImplementedError


@dataclass(frozen=True)
class DeltaDistribution(Distribution):
    """Point mass: action(phi) = phi(x0), exactly."""

    x0: float

    @property
    def support(self) -> tuple[float, float]:
        return (self.x0, self.x0)

    def apply(self, phi) -> float:
        return float(phi(self.x0))

    def _apply_extended(self, func, func_support) -> float:
        lo, hi = func_support
        if not (lo <= self.x0 <= hi):
            return 0.0
        return float(func(self.x0))


@dataclass(frozen=True)
class RegularDistribution(Distribution):
    """Integration against a locally integrable function."""

    f: Callable[[float], float]
    domain: Interval
    breakpoints: tuple[float, ...] = ()
    rtol: float = 1e-9

    @property
    def support(self) -> tuple[float, float]:
        return (self.domain.a, self.domain.b)

    def _integrate(self, g: Callable, lo: float, hi: float) -> float:
        work = self.domain.truncated()
        lo, hi = max(lo, work.a), min(hi, work.b)
        if hi <= lo:
            return 0.0
        pts = [p for p in self.breakpoints if lo < p < hi]
        val, _ = quad(
            lambda y: float(self.f(y)) * float(g(y)),
            lo, hi, points=pts or None, epsabs=1e-300, epsrel=self.rtol, limit=200,
        )
        return val

    def apply(self, phi) -> float:
        lo, hi = phi.support
        return self._integrate(phi, lo, hi)

    def _apply_extended(self, func, func_support) -> float:
        return self._integrate(func, *func_support)


class _CutoffDerivInput:
    """The admissible test input psi(x) * D^alpha_opp phi(x), with support data."""

    def __init__(self, psi, psi_support, phi, opp: Direction, alpha: float):
        self.psi = psi
        self.phi = phi
        self.opp = opp
        self.alpha = alpha
        lo, hi = psi_support
        # the opposite-direction derivative of phi vanishes on one side of
        # supp(phi): right-derived inputs vanish above hi(phi), left below.
        if opp is Direction.RIGHT:
            hi = min(hi, phi.support[1])
        else:
            lo = max(lo, phi.support[0])
        self.support = (lo, hi)

    def __call__(self, x: float) -> float:
        psival = float(self.psi(x))
        if psival == 0.0:
            return 0.0
        return psival * test_deriv(self.phi, self.opp, self.alpha, x)


def _opposite(direction: Direction) -> Direction:
    return Direction.RIGHT if direction is Direction.LEFT else Direction.LEFT


@dataclass(frozen=True)
class DerivedDistribution(Distribution):
    """Weak fractional derivative of a compactly supported distribution.

    action(phi) = (-1)^[alpha] parent(psi * D^alpha_opp phi); the support
    obeys the one-sided law: left derivatives extend support to the right,
    right derivatives to the left.
    """

    parent: Distribution
    direction: Direction
    alpha: float
    cutoff: SmoothCutoff

    @property
    def support(self) -> tuple[float, float]:
        lo, hi = self.parent.support
        if self.direction is Direction.LEFT:
            return (lo, math.inf)
        return (-math.inf, hi)

    def apply(self, phi) -> float:
        arg = _CutoffDerivInput(
            self.cutoff, self.cutoff.support, phi, _opposite(self.direction), self.alpha
        )
        sign = (-1.0) ** int(math.floor(self.alpha))
        return sign * self.parent._apply_extended(arg, arg.support)


def dist_apply(u: Distribution, phi) -> float:
    """Evaluate a distribution's action on a test function."""
    return u.apply(phi)


def _validate_cutoff(psi: SmoothCutoff, support: tuple[float, float]) -> None:
    lo, hi = support
    probes = np.linspace(lo, hi, 65) if hi > lo else np.array([lo])
    vals = np.asarray(psi(probes), dtype=float).ravel()
    if np.max(np.abs(vals - 1.0)) > 1e-12:
        raise DomainError("cutoff is not identically 1 on the distribution's support")


def dist_frac_derivative_compact(
    u: Distribution,
    direction: Direction | str,
    alpha,
    psi: SmoothCutoff | None = None,
) -> DerivedDistribution:
    """Weak fractional derivative of a compactly supported distribution.

    The cutoff must be identically 1 on supp(u) (checked on a probe grid);
    when omitted, one is built from the support hull with a margin of half
    its length.  The result does not depend on the admissible cutoff chosen.
    """
    direction = Direction.parse(direction)
    a = float(getattr(alpha, "alpha", alpha))
    if not (0.0 < a < 1.0):
        raise UsageError("distributional derivatives are implemented for 0 < alpha < 1")
    lo, hi = u.support
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise UsageError("compact-support route requires a compactly supported distribution")
    if psi is None:
        margin = 0.5 * max(hi - lo, 1.0)
        psi = SmoothCutoff(lo, hi, margin)
    _validate_cutoff(psi, (lo, hi))
    return DerivedDistribution(parent=u, direction=direction, alpha=a, cutoff=psi)


class _PartitionDerived(Distribution):
    """Derivative of a general distribution through a partition-of-unity sum."""

    def __init__(self, parent: Distribution, direction: Direction, alpha: float,
                 pou: PartitionOfUnity, rel_cutoff: float = 1e-12, max_terms: int = 4096):
        self.parent = parent
        self.direction = direction
        self.alpha = alpha
        self.pou = pou
        self.rel_cutoff = rel_cutoff
        self.max_terms = max_terms
        lo, hi = parent.support
        self.support = (lo, math.inf) if direction is Direction.LEFT else (-math.inf, hi)

    def apply(self, phi) -> float:
        opp = _opposite(self.direction)
        p_lo, p_hi = self.parent.support
        if not (math.isfinite(p_lo) and math.isfinite(p_hi)):
            dom = getattr(self.parent, "domain", None)
            if dom is None:
                raise UsageError("partition route needs bounded support metadata")
            work = dom.truncated()
            p_lo, p_hi = max(p_lo, work.a), min(p_hi, work.b)
        # only members meeting the parent's support can contribute, so the
        # sum is finite; scanning outward, it stops once two consecutive
        # partial sums agree to rel_cutoff after a nonzero term appeared.
        members = self.pou.members_covering(p_lo, p_hi)
        if len(members) > self.max_terms:
            raise UsageError("partition sum would exceed the term budget")
        sign = (-1.0) ** int(math.floor(self.alpha))
        total = 0.0
        started = False
        stable = 0
        for j in members:
            arg = _CutoffDerivInput(
                self.pou.member(j), self.pou.member_support(j), phi, opp, self.alpha
            )
            if arg.support[1] <= arg.support[0]:
                continue
            term = sign * self.parent._apply_extended(arg, arg.support)
            total += term
            if abs(term) > self.rel_cutoff * max(1.0, abs(total)):
                started = True
                stable = 0
            elif started:
                stable += 1
                if stable >= 2:
                    break
        return total


def dist_frac_derivative_general(
    u: Distribution,
    direction: Direction | str,
    alpha,
    pou: PartitionOfUnity | None = None,
) -> Distribution:
    """Weak fractional derivative of a general distribution.

    action(phi) = (-1)^[alpha] sum_j u(psi_j * D^alpha_opp phi); the sum is
    finite for compactly supported parents and truncated when consecutive
    partial sums agree to 1e-12 relative otherwise.
    """
    direction = Direction.parse(direction)
    a = float(getattr(alpha, "alpha", alpha))
    if not (0.0 < a < 1.0):
        raise UsageError("distributional derivatives are implemented for 0 < alpha < 1")
    if pou is None:
        lo, hi = u.support
        span = (hi - lo) if (math.isfinite(lo) and math.isfinite(hi) and hi > lo) else 1.0
        pou = PartitionOfUnity(origin=(lo if math.isfinite(lo) else 0.0) - span, overlap=span)
    return _PartitionDerived(u, direction, a, pou)


def dist_fourier_derivative(
    u: Distribution,
    alpha: float,
    phi: TestFunction | TestFunctionSum,
    window: float | None = None,
    n: int = 16385,
) -> float:
    """Action of the spectral derivative of a tempered distribution on phi.

    Computes (-1)^[alpha] u(F-derivative of phi) with the spectral derivative
    evaluated on a symmetric padded window; raises when phi or its transform
    has not decayed (in space at the window edge, in frequency at the grid's
    Nyquist limit).
    """
    if alpha < 0:
        raise UsageError("spectral route requires alpha >= 0")
    lo, hi = phi.support
    half_span = max(abs(lo), abs(hi))
    if window is None:
        window = 8.0 * max(half_span, 1.0)
    if window < 2.0 * half_span:
        raise DomainError("window too small: test function does not decay inside it")
    grid = make_grid(Interval(-window, window), n, GridKind.UNIFORM)
    samples = sample(phi, grid)
    m = samples.values.size - 1
    spec_vals = np.abs(np.fft.fft(samples.values[:-1]))
    tail = max(spec_vals[m // 2 - 1], spec_vals[m // 2])
    if tail > 1e-6 * max(spec_vals.max(), 1e-300):
        raise DomainError("insufficient decay: transform not resolved at this resolution")
    dphi = fourier_derivative(samples, alpha)
    func = lambda x: float(dphi(x))
    sign = (-1.0) ** int(math.floor(alpha))
    return sign * u._apply_extended(func, (-window, window))


def descriptor_to_distribution(payload: dict, base_dir: str = ".") -> Distribution:
    """Build a distribution from its JSON descriptor.

    Accepted forms:
      {"kind": "delta", "x0": 0.0}
      {"kind": "regular", "csv": "path"}           (sampled function, interpolated)
      {"kind": "derived", "dir": "left", "alpha": 0.5, "of": {...}}
    """
    import os

    from .grid import read_csv

    if not isinstance(payload, dict) or "kind" not in payload:
        raise UsageError("distribution descriptor must be an object with a 'kind'")
    kind = payload["kind"]
    if kind == "delta":
        try:
            return DeltaDistribution(float(payload["x0"]))
        except (KeyError, TypeError, ValueError):
            raise UsageError("delta descriptor needs a numeric 'x0'")
    if kind == "regular":
        path = payload.get("csv")
        if not path:
            raise UsageError("regular descriptor needs a 'csv' path")
        gf = read_csv(os.path.join(base_dir, path), allow_nan=False)
        return RegularDistribution(lambda x: float(gf(x)), gf.grid.interval)
    if kind == "derived":
        try:
            direction = Direction.parse(payload["dir"])
            alpha = float(payload["alpha"])
            parent = descriptor_to_distribution(payload["of"], base_dir)
        except KeyError as exc:
            raise UsageError(f"derived descriptor missing field {exc}")
        return dist_frac_derivative_compact(parent, direction, alpha)
    raise UsageError(f"unknown distribution kind {kind!r}")


def dist_consistency_limit(
    u: Distribution,
    probe: TestFunction | TestFunctionSum,
    direction: Direction | str = Direction.LEFT,
    alphas: Sequence[float] = (0.9, 0.99, 0.999),
) -> dict:
    """Approach of the weak fractional derivative to the classical one.

    Evaluates the derived action at the given orders and the classical
    distributional derivative -u(phi'); reports the gaps and whether they
    shrink monotonically.
    """
    direction = Direction.parse(direction)

    class _ProbeDeriv:
        support = probe.support

        def __call__(self, x):
            return probe.deriv(x)

    classical = -u.apply(_ProbeDeriv())
    values = []
    for a in alphas:
        derived = dist_frac_derivative_compact(u, direction, a)
        values.append(derived.apply(probe))
    gaps = [abs(v - classical) for v in values]
    monotone = all(g1 >= g2 for g1, g2 in zip(gaps[:-1], gaps[1:]))
    return {
        "alphas": tuple(alphas),
        "values": tuple(values),
        "classical": classical,
        "gaps": tuple(gaps),
        "monotone": monotone,
    }

"""Test functions, mollifiers, and weak fractional derivatives.

A weak derivative of order alpha is defined through the integration-by-parts
pairing: v is the left weak derivative of u when

    int v phi dx  =  (-1)^[alpha] int u (D^alpha_right phi~) dx

for every smooth compactly supported phi, where phi~ is the zero extension of
phi and the right classical derivative acts on it.  Because one-sided
derivatives leak beyond the support (the tail decays only algebraically),
the pairing integrand is genuinely global; `test_deriv` evaluates it exactly
piecewise: identically zero on the clean side, the finite-interval derivative
on the support, and the tail derivative beyond it.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from .integrals import quad

from .derivatives import rl_derivative
from .errors import DomainError, UsageError
from .grid import Grid, GridFunction, Interval
from .integrals import _left_integral_at, _oriented, rl_integral, rl_integral_at
from .special import Direction, gamma

__all__ = [
    "TestFunction",
    "TestFunctionSum",
    "MollifierSpec",
    "StepFunction",
    "default_test_family",
    "test_deriv",
    "pollution_tail",
    "mollify",
    "step_weak_derivative",
    "verify_weak_derivative",
    "weak_derivative_compute",
    "PairingReport",
    "WeakDerivativeResult",
]

# exp(1/(s^2-1)) underflows to an exact double-precision zero once the
# exponent passes ~-745; below this margin the bump is literally zero.
_BUMP_EDGE = 1.0 - 1.0e-3


def _bump_profile(s: np.ndarray) -> np.ndarray:
    out = np.zeros_like(s)
    inner = np.abs(s) < _BUMP_EDGE
    si = s[inner]
    out[inner] = np.exp(1.0 / (si * si - 1.0))
    return out


def _bump_profile_deriv(s: np.ndarray) -> np.ndarray:
    out = np.zeros_like(s)
    inner = np.abs(s) < _BUMP_EDGE
    si = s[inner]
    d = si * si - 1.0
    out[inner] = np.exp(1.0 / d) * (-2.0 * si / (d * d))
    return out


@dataclass(frozen=True)
class TestFunction:
    """The standard bump amplitude * exp(1/((x-c)^2/r^2 - 1)) on |x-c| < r.

    Infinitely differentiable on the whole line and exactly zero outside
    [c-r, c+r].
    """

    __test__ = False  # not a pytest class, despite the (standard) name

    center: float
    radius: float
    amplitude: float = 1.0

    def __post_init__(self) -> None:
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise UsageError("bump radius must be positive")

    @property
    def support(self) -> tuple[float, float]:
        return (self.center - self.radius, self.center + self.radius)

    def __call__(self, x):
        if isinstance(x, (float, int)):
            s = (x - self.center) / self.radius
            if abs(s) >= _BUMP_EDGE:
                return 0.0
            return self.amplitude * math.exp(1.0 / (s * s - 1.0))
        s = (np.asarray(x, dtype=float) - self.center) / self.radius
        out = self.amplitude * _bump_profile(s)
        return float(out) if np.isscalar(x) else out

    def deriv(self, x):
        if isinstance(x, (float, int)):
            s = (x - self.center) / self.radius
            if abs(s) >= _BUMP_EDGE:
                return 0.0
            d = s * s - 1.0
            return self.amplitude * math.exp(1.0 / d) * (-2.0 * s / (d * d)) / self.radius
        s = (np.asarray(x, dtype=float) - self.center) / self.radius
        out = self.amplitude * _bump_profile_deriv(s) / self.radius
        return float(out) if np.isscalar(x) else out

    def integral(self) -> float:
        """Total mass, to quadrature accuracy."""
        val, _ = quad(self, *self.support, epsabs=1e-14, epsrel=1e-12)
        return val


@dataclass(frozen=True)
class TestFunctionSum:
    """Finite linear combination of bumps; still smooth and compactly supported."""

    __test__ = False

    terms: tuple[tuple[float, TestFunction], ...]

    @property
    def support(self) -> tuple[float, float]:
        los, his = zip(*(t.support for _, t in self.terms))
        return (min(los), max(his))

    def __call__(self, x):
        return sum(c * t(x) for c, t in self.terms)

    def deriv(self, x):
        return sum(c * t.deriv(x) for c, t in self.terms)

    def integral(self) -> float:
        return sum(c * t.integral() for c, t in self.terms)


def default_test_family(interval: Interval, count: int = 16) -> list[TestFunction]:
    """Bumps with centers equispaced in the inner 80% of the interval and
    radii alternating between 5% and 10% of its length, supports strictly
    interior."""
    work = interval.truncated()
    length = work.length
    centers = np.linspace(work.a + 0.1 * length, work.b - 0.1 * length, count)
    family = []
    for i, c in enumerate(centers):
        r = (0.05 if i % 2 == 0 else 0.10) * length
        r = min(r, 0.9 * (c - work.a), 0.9 * (work.b - c))
        family.append(TestFunction(center=float(c), radius=float(r)))
    return family


@lru_cache(maxsize=1)
def _bump_mass_unit() -> float:
    val, _ = quad(lambda s: math.exp(1.0 / (s * s - 1.0)), -1.0, 1.0, epsabs=1e-15, epsrel=1e-13)
    return val


@dataclass(frozen=True)
class MollifierSpec:
    """The standard mollifier eta_eps, supported on [-eps, eps], unit mass."""

    epsilon: float
    normalization: float = field(default=0.0, compare=False)

    def __post_init__(self) -> None:
        if self.epsilon <= 0:
            raise UsageError("mollifier width must be positive")
        if self.normalization == 0.0:
            object.__setattr__(self, "normalization", 1.0 / (_bump_mass_unit() * self.epsilon))

    def __call__(self, t):
        if isinstance(t, (float, int)):
            s = t / self.epsilon
            if abs(s) >= _BUMP_EDGE:
                return 0.0
            return self.normalization * math.exp(1.0 / (s * s - 1.0))
        s = np.asarray(t, dtype=float) / self.epsilon
        out = self.normalization * _bump_profile(s)
        return float(out) if np.isscalar(t) else out


@dataclass(frozen=True)
class StepFunction:
    """Piecewise constant, left-continuous at its breakpoints."""

    breakpoints: tuple[float, ...]
    levels: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.levels) != len(self.breakpoints) + 1:
            raise UsageError("need one level per piece (len(levels) == len(breakpoints)+1)")
        if len(self.breakpoints) and not np.all(np.diff(self.breakpoints) > 0):
            raise UsageError("breakpoints must be strictly increasing")

    def __call__(self, x):
        if isinstance(x, (float, int)):
            idx = bisect.bisect_left(self.breakpoints, x)
            return float(self.levels[idx])
        idx = np.searchsorted(np.asarray(self.breakpoints), np.asarray(x, dtype=float), side="left")
        out = np.asarray(self.levels, dtype=float)[idx]
        return float(out) if np.isscalar(x) else out


def test_deriv(
    phi: TestFunction | TestFunctionSum,
    direction: Direction | str,
    alpha,
    x: float,
    rtol: float = 1e-10,
) -> float:
    """Classical derivative of the zero-extended test function, on all of R.

    Piecewise exact: returns 0.0 (not merely small) on the unpolluted side,
    the finite-interval Riemann-Liouville derivative on the support, and the
    algebraically decaying tail derivative beyond it.
    """
    direction = Direction.parse(direction)
    a = float(getattr(alpha, "alpha", alpha))
    if not (0.0 < a < 1.0):
        raise UsageError("test-function derivatives require 0 < alpha < 1")
    lo, hi = phi.support
    if direction is Direction.LEFT:
        if x <= lo:
            return 0.0
        if x <= hi:
            return rl_integral_at(phi.deriv, Direction.LEFT, 1.0 - a, x, Interval(lo, hi), rtol=rtol)
        val, _ = quad(
            lambda y: phi(y) * (x - y) ** (-1.0 - a), lo, hi, epsabs=1e-300, epsrel=rtol, limit=200
        )
        return -a / gamma(1.0 - a) * val
    # right derivative: tail to the left of the support
    if x >= hi:
        return 0.0
    if x >= lo:
        return -rl_integral_at(phi.deriv, Direction.RIGHT, 1.0 - a, x, Interval(lo, hi), rtol=rtol)
    val, _ = quad(
        lambda y: phi(y) * (y - x) ** (-1.0 - a), lo, hi, epsabs=1e-300, epsrel=rtol, limit=200
    )
    return -a / gamma(1.0 - a) * val


test_deriv.__test__ = False  # spec-mandated name; not a pytest item


def pollution_tail(
    phi: TestFunction | TestFunctionSum,
    sigma,
    x: float,
    direction: Direction | str = Direction.LEFT,
    rtol: float = 1e-10,
) -> float:
    """Value of the fractional integral beyond the support (the leaked tail).

    For the left integral this is (1/Gamma(sigma)) int phi(y) (x-y)^(sigma-1) dy
    over the support, defined for x strictly beyond the polluted-side edge.
    """
    direction = Direction.parse(direction)
    s = float(getattr(sigma, "alpha", sigma))
    if not (0.0 < s < 1.0):
        raise UsageError("tail evaluation requires 0 < sigma < 1")
    lo, hi = phi.support
    if direction is Direction.LEFT:
        if x <= hi:
            raise DomainError(f"x={x} is not beyond the polluted (right) support edge {hi}")
        kernel = lambda y: phi(y) * (x - y) ** (s - 1.0)
    else:
        if x >= lo:
            raise DomainError(f"x={x} is not beyond the polluted (left) support edge {lo}")
        kernel = lambda y: phi(y) * (y - x) ** (s - 1.0)
    val, _ = quad(kernel, lo, hi, epsabs=1e-300, epsrel=rtol, limit=200)
    return val / gamma(s)


def _as_callable(
    u, domain: Interval | None
) -> tuple[Callable[[float], float], Interval | None, tuple[float, ...]]:
    """Normalize GridFunction/StepFunction/callable inputs to a plain callable,
    its zero-extension domain, and quadrature split points."""
    if isinstance(u, GridFunction):
        dom = domain or u.grid.interval
        return (lambda x: float(u(x))), dom, ()
    if isinstance(u, StepFunction):
        return (lambda x: float(u(x))), domain, tuple(u.breakpoints)
    return u, domain, ()


def mollify(
    u,
    spec: MollifierSpec,
    domain: Interval | None = None,
    singular_points: Sequence[float] = (),
    rtol: float = 1e-9,
) -> Callable[[float], float]:
    """Convolution eta_eps * u~ where u~ is u zero-extended outside ``domain``.

    ``u`` may be a GridFunction (interpolated, domain defaulting to its
    interval), a StepFunction, or a plain callable (no extension unless a
    domain is given).  Known kinks of u can be passed as quadrature split
    points.
    """
    f, dom, breaks = _as_callable(u, domain)
    breaks = tuple(breaks) + tuple(singular_points)
    eps = spec.epsilon

    def convolved(x: float) -> float:
        lo, hi = x - eps, x + eps
        if dom is not None and dom.finite:
            pts = [p for p in (*breaks, dom.a, dom.b) if lo < p < hi]
        else:
            pts = [p for p in breaks if lo < p < hi]

        def integrand(y: float) -> float:
            if dom is not None and not (dom.a < y < dom.b):
                return 0.0
            return spec(x - y) * f(y)

        val, _ = quad(
            integrand, lo, hi, points=pts or None, epsabs=1e-300, epsrel=rtol, limit=200
        )
        return val

    return convolved


def step_weak_derivative(
    s: StepFunction,
    direction: Direction | str,
    alpha,
    x: float,
    interval: Interval,
) -> float:
    """Closed-form weak derivative of a step function on a finite interval.

    The left form is the anchored-constant term plus one jump kernel per
    breakpoint already passed:

        [ l_1 (x-a)^-alpha + sum_k (l_{k+1}-l_k) (x-bp_k)^-alpha ] / Gamma(1-alpha)

    and the right form is its mirror.  The value at a breakpoint (or at the
    anchored endpoint) is undefined pointwise and raises DomainError.
    """
    direction = Direction.parse(direction)
    a10 = float(getattr(alpha, "alpha", alpha))
    if not (0.0 < a10 < 1.0):
        raise UsageError("step closed form requires 0 < alpha < 1")
    work = interval.truncated()
    in_left = work.a < x <= work.b
    in_right = work.a <= x < work.b
    if not (in_left if Direction.parse(direction) is Direction.LEFT else in_right):
        raise DomainError(f"x={x} outside the domain of the {direction} closed form")
    if any(x == bp for bp in s.breakpoints):
        raise DomainError(f"weak derivative of a step is undefined at breakpoint x={x}")
    levels = s.levels
    inv_g = 1.0 / gamma(1.0 - a10)
    if direction is Direction.LEFT:
        total = levels[0] * (x - work.a) ** (-a10)
        for bp, lo_level, hi_level in zip(s.breakpoints, levels[:-1], levels[1:]):
            if x > bp:
                total += (hi_level - lo_level) * (x - bp) ** (-a10)
    else:
        total = levels[-1] * (work.b - x) ** (-a10)
        for bp, lo_level, hi_level in zip(s.breakpoints, levels[:-1], levels[1:]):
            if x < bp:
                total += (lo_level - hi_level) * (bp - x) ** (-a10)
    return total * inv_g


@dataclass(frozen=True)
class PairingReport:
    """Residuals of the integration-by-parts pairing over a test family."""

    residuals: tuple[float, ...]
    max_residual: float
    tolerance: float
    tail_bound: float
    passed: bool


def _pairing_lhs(v, phi, work: Interval, rtol: float) -> float:
    f, dom, breaks = _as_callable(v, work)
    lo = max(phi.support[0], work.a)
    hi = min(phi.support[1], work.b)
    pts = [p for p in breaks if lo < p < hi]
    val, _ = quad(
        lambda y: f(y) * phi(y), lo, hi, points=pts or None, epsabs=1e-300, epsrel=rtol, limit=200
    )
    return val


_GAUSS_N = 48
_GAUSS_X, _GAUSS_W = np.polynomial.legendre.leggauss(_GAUSS_N)


def _gauss_segment(f: Callable[[float], float], lo: float, hi: float) -> float:
    if hi <= lo:
        return 0.0
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    xs = mid + half * _GAUSS_X
    return half * float(sum(w * f(x) for x, w in zip(xs, _GAUSS_W)))


def _pairing_rhs(
    u,
    phi,
    direction: Direction,
    alpha: float,
    work: Interval,
    u_breaks: Sequence[float],
    rtol: float,
    window_tail: bool,
) -> tuple[float, float]:
    """int_Omega u * (opposite classical derivative of phi~), plus a tail bound
    when Omega is a truncation window for the real line."""
    f, dom, breaks = _as_callable(u, work)
    u_breaks = sorted(set(tuple(breaks) + tuple(u_breaks)))
    lo, hi = phi.support
    opp = Direction.RIGHT if direction is Direction.LEFT else Direction.LEFT
    dphi = lambda y: test_deriv(phi, opp, alpha, y, rtol=max(rtol, 1e-10))

    if opp is Direction.RIGHT:
        segments = [(work.a, lo), (lo, hi)]  # right derivative pollutes to the left
    else:
        segments = [(lo, hi), (hi, work.b)]
    total = 0.0
    for seg_lo, seg_hi in segments:
        cuts = sorted({seg_lo, seg_hi, *(p for p in u_breaks if seg_lo < p < seg_hi)})
        for c_lo, c_hi in zip(cuts[:-1], cuts[1:]):
            total += _gauss_segment(lambda y: f(y) * dphi(y), c_lo, c_hi)

    tail = 0.0
    if window_tail:
        # the discarded polluted tail beyond the window edge is bounded by
        # sup|u| times the monotone leaked-integral value at the edge.
        edge = work.a if opp is Direction.RIGHT else work.b
        sup_u = max(abs(f(edge)), abs(f(0.5 * (work.a + work.b))))
        try:
            tail = abs(sup_u) * abs(pollution_tail(phi, 1.0 - alpha, edge, opp))
        except DomainError:
            tail = 0.0
    return total, tail


def verify_weak_derivative(
    u,
    v,
    direction: Direction | str,
    alpha,
    family: Sequence[TestFunction] | None = None,
    interval: Interval | None = None,
    tolerance: float = 1e-6,
    u_breakpoints: Sequence[float] = (),
    rtol: float = 1e-9,
) -> PairingReport:
    """Check whether v is the weak fractional derivative of u on the interval.

    For each test function phi the residual is

        r(phi) = | int v phi - (-1)^[alpha] int u (D^alpha_opp phi~) |

    and the report carries the maximum over the family (plus the analytic
    truncation-tail bound when the interval is a window for R).
    """
    direction = Direction.parse(direction)
    a = float(getattr(alpha, "alpha", alpha))
    if not (0.0 < a < 1.0):
        raise UsageError("pairing verification requires 0 < alpha < 1")
    if interval is None:
        if isinstance(u, GridFunction):
            interval = u.grid.interval
        else:
            raise UsageError("an interval is required for non-grid inputs")
    work = interval.truncated()
    window_tail = not interval.finite
    family = list(family) if family is not None else default_test_family(work)
    residuals = []
    tail_max = 0.0
    for phi in family:
        lhs = _pairing_lhs(v, phi, work, rtol)
        rhs, tail = _pairing_rhs(u, phi, direction, a, work, u_breakpoints, rtol, window_tail)
        residuals.append(abs(lhs - rhs) + tail)
        tail_max = max(tail_max, tail)
    max_res = max(residuals)
    return PairingReport(
        residuals=tuple(residuals),
        max_residual=max_res,
        tolerance=tolerance,
        tail_bound=tail_max,
        passed=max_res <= tolerance,
    )


@dataclass(frozen=True)
class WeakDerivativeResult:
    """Weak derivative samples plus the absolute-continuity heuristic.

    The diagnostic tracks the total variation of the discrete derivative of
    I^(1-alpha)u as the evaluation mesh of the fixed piecewise-linear data
    model is refined; unbounded growth (ratio > 2 per refinement) marks the
    lifted function as suspect.  This is a heuristic: absolute continuity is
    not decidable from finitely many samples.
    """

    values: GridFunction
    tv_ratios: tuple[float, float]
    suspect_non_ac: bool


def weak_derivative_compute(
    u: GridFunction, direction: Direction | str, alpha
) -> WeakDerivativeResult:
    """Weak fractional derivative of sampled data with an AC diagnostic.

    The values come from the same exact-differentiation engine as the
    classical backend (the two coincide wherever the classical derivative
    exists); the diagnostic refines the evaluation mesh of I^(1-alpha)u twice
    and compares total-variation growth.
    """
    direction = Direction.parse(direction)
    a = float(getattr(alpha, "alpha", alpha))
    deriv = rl_derivative(u, direction, a)

    nodes, values, _ = _oriented(u, direction)
    # the growth ratio is a property of the data model, not of resolution;
    # decimating the probe mesh keeps the diagnostic O(n) cheap.
    stride = max(1, (nodes.size - 1) // 512)
    pts = np.unique(np.concatenate([nodes[::stride], nodes[-1:]]))
    tvs = []
    for level in range(3):
        w = _left_integral_at(nodes, values, 1.0 - a, pts)
        dd = np.diff(w) / np.diff(pts)
        tvs.append(float(np.sum(np.abs(np.diff(dd)))))
        if level < 2:
            mids = 0.5 * (pts[:-1] + pts[1:])
            merged = np.empty(pts.size + mids.size)
            merged[0::2] = pts
            merged[1::2] = mids
            pts = merged
    r1 = tvs[1] / tvs[0] if tvs[0] > 0 else 1.0
    r2 = tvs[2] / tvs[1] if tvs[1] > 0 else 1.0
    return WeakDerivativeResult(
        values=deriv,
        tv_ratios=(r1, r2),
        suspect_non_ac=bool(r1 > 2.0 and r2 > 2.0),
    )

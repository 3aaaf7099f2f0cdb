"""Weak-derivative machinery: one-sided derivatives of test functions, the
step-function closed form (frozen spot value 1.2585434267646460 from the
piecewise formula in high precision), and the pairing that defines weak
differentiation."""

import numpy as np
import pytest
from scipy.integrate import quad

from weakfrac.derivatives import rl_derivative
from weakfrac.errors import DomainError, UsageError
from weakfrac.grid import GridKind, Interval, graded_pieces, make_grid, sample
from weakfrac.special import Direction, gamma
from weakfrac.weak import (
    MollifierSpec,
    StepFunction,
    TestFunction as Bump,
    TestFunctionSum,
    default_test_family,
    mollify,
    pollution_tail,
    step_weak_derivative,
    test_deriv,
    verify_weak_derivative,
    weak_derivative_compute,
)

LEFT, RIGHT = Direction.LEFT, Direction.RIGHT
IV = Interval(-1.0, 1.0)
STEP = StepFunction((0.0,), (1.0, 2.0))


def test_bump_properties():
    phi = Bump(0.2, 0.3, amplitude=2.0)
    assert phi.support == (pytest.approx(-0.1), pytest.approx(0.5))
    assert phi(0.2) == pytest.approx(2.0 * np.exp(-1.0))
    assert phi(0.5) == 0.0 and phi(-2.0) == 0.0
    assert phi.deriv(0.2) == 0.0
    # derivative spot check by central difference
    h = 1e-6
    assert phi.deriv(0.3) == pytest.approx((phi(0.3 + h) - phi(0.3 - h)) / (2 * h), rel=1e-6)


def test_default_family_strictly_interior():
    family = default_test_family(IV)
    assert len(family) == 16
    for phi in family:
        lo, hi = phi.support
        assert lo > IV.a and hi < IV.b


def test_test_deriv_zero_side_is_exact_zero():
    phi = Bump(0.0, 0.25)
    assert test_deriv(phi, LEFT, 0.5, -0.3) == 0.0
    assert test_deriv(phi, RIGHT, 0.5, 0.3) == 0.0


def test_test_deriv_inside_matches_grid_backend():
    phi = Bump(0.0, 0.25)
    g = make_grid(Interval(-0.3, 0.3), 4097, GridKind.UNIFORM)
    d = rl_derivative(sample(phi, g), LEFT, 0.5)
    for xq in (-0.1, 0.05, 0.2):
        i = int(np.argmin(np.abs(g.nodes - xq)))
        assert test_deriv(phi, LEFT, 0.5, float(g.nodes[i])) == pytest.approx(
            d.values[i], abs=5e-4
        )


def test_test_deriv_tail_matches_quadrature():
    # beyond the support the left derivative is the differentiated tail:
    # -alpha/Gamma(1-alpha) * int phi(y) (x-y)^(-alpha-1) dy
    phi = Bump(0.0, 0.25)
    alpha, x = 0.5, 1.7
    val, _ = quad(lambda y: phi(y) * (x - y) ** (-1.0 - alpha), *phi.support, epsrel=1e-12)
    expected = -alpha / gamma(1.0 - alpha) * val
    assert test_deriv(phi, LEFT, alpha, x) == pytest.approx(expected, rel=1e-9)


def test_test_deriv_right_tail_decays():
    phi = Bump(0.0, 0.25)
    vals = [abs(test_deriv(phi, RIGHT, 0.5, x)) for x in (-1.0, -2.0, -4.0, -8.0)]
    assert vals[0] > vals[1] > vals[2] > vals[3]


def test_pollution_tail_leading_order():
    # L(x) / ((x-c)^(s-1) mass / Gamma(s)) -> 1 far from the support
    phi = Bump(0.0, 0.1)
    sigma = 0.5
    mass = phi.integral()
    x = 50.0
    ratio = pollution_tail(phi, sigma, x) / ((x - phi.center) ** (sigma - 1.0) * mass / gamma(sigma))
    assert ratio == pytest.approx(1.0, abs=1e-2)


def test_pollution_tail_domain_error():
    phi = Bump(0.0, 0.1)
    with pytest.raises(DomainError):
        pollution_tail(phi, 0.5, 0.05)
    with pytest.raises(DomainError):
        pollution_tail(phi, 0.5, -5.0)  # wrong side for the left tail


def test_zero_mass_pair_decays_faster():
    pair = TestFunctionSum(((1.0, Bump(-0.05, 0.04)), (-1.0, Bump(0.05, 0.04))))
    xs = np.linspace(1.1, 10.0, 16)
    generic = np.array([abs(pollution_tail(Bump(0.0, 0.04), 0.5, float(x))) for x in xs])
    cancel = np.array([abs(pollution_tail(pair, 0.5, float(x))) for x in xs])
    slope_generic = np.polyfit(np.log(xs), np.log(generic), 1)[0]
    slope_cancel = np.polyfit(np.log(xs), np.log(cancel), 1)[0]
    assert slope_cancel < slope_generic - 0.5


def test_pollution_derivative_monotone_vanishing():
    phi = Bump(0.0, 0.1)
    xs = np.geomspace(0.2, 20.0, 12) + phi.support[1]
    vals = [abs(test_deriv(phi, LEFT, 0.5, float(x))) for x in xs]
    assert all(a > b for a, b in zip(vals[:-1], vals[1:]))
    assert vals[-1] < 1e-3


def test_mollifier_unit_mass():
    for eps in (0.05, 0.3):
        spec = MollifierSpec(eps)
        mass, _ = quad(spec, -eps, eps, epsabs=1e-13, epsrel=1e-11)
        assert mass == pytest.approx(1.0, abs=1e-10)


def test_mollify_constant_and_step():
    spec = MollifierSpec(0.1)
    one = mollify(lambda x: 1.0, spec)
    assert one(0.3) == pytest.approx(1.0, abs=1e-9)
    step01 = StepFunction((0.0,), (0.0, 1.0))
    m = mollify(step01, spec)
    assert m(-0.2) == pytest.approx(0.0, abs=1e-12)
    assert m(0.2) == pytest.approx(1.0, abs=1e-9)
    assert m(0.0) == pytest.approx(0.5, abs=1e-9)


def test_step_function_left_continuous():
    assert STEP(0.0) == 1.0
    assert STEP(1e-12) == 2.0
    assert STEP(-0.5) == 1.0
    with pytest.raises(UsageError):
        StepFunction((0.0,), (1.0,))


def test_step_weak_derivative_frozen_value():
    val = step_weak_derivative(STEP, LEFT, 0.5, 0.5, IV)
    assert val == pytest.approx(1.2585434267646460, rel=1e-12)


def test_step_weak_derivative_left_piece_ignores_upper_level():
    # on (-1, 0] only the anchored-constant term survives
    for mu in (2.0, 5.0, -3.0):
        s = StepFunction((0.0,), (1.0, mu))
        val = step_weak_derivative(s, LEFT, 0.5, -0.5, IV)
        assert val == pytest.approx((0.5) ** -0.5 / gamma(0.5), rel=1e-12)


def test_step_weak_derivative_no_jump_reduces_to_constant():
    s = StepFunction((0.0,), (1.5, 1.5))
    for x in (-0.7, 0.3, 0.9):
        val = step_weak_derivative(s, LEFT, 0.5, x, IV)
        assert val == pytest.approx(1.5 * (x + 1.0) ** -0.5 / gamma(0.5), rel=1e-12)


def test_step_weak_derivative_breakpoint_error():
    with pytest.raises(DomainError):
        step_weak_derivative(STEP, LEFT, 0.5, 0.0, IV)
    with pytest.raises(DomainError):
        step_weak_derivative(STEP, LEFT, 0.5, -1.0, IV)


def test_step_weak_derivative_right_mirror():
    # right form of the reflected step equals the left form reflected
    s_right = StepFunction((0.0,), (2.0, 1.0))
    for x in (-0.6, 0.4):
        left_val = step_weak_derivative(STEP, LEFT, 0.5, x, IV)
        right_val = step_weak_derivative(s_right, RIGHT, 0.5, -x, IV)
        assert right_val == pytest.approx(left_val, rel=1e-12)


def test_pairing_step_passes():
    vfun = lambda x: step_weak_derivative(STEP, LEFT, 0.5, float(x), IV)
    rep = verify_weak_derivative(STEP, vfun, LEFT, 0.5, interval=IV, tolerance=1e-5,
                                 u_breakpoints=(0.0,))
    assert rep.passed
    assert rep.max_residual < 1e-6


def test_pairing_constant_passes_and_caputo_candidate_fails():
    c = 1.0
    vconst = lambda x: c * (x + 1.0) ** -0.5 / gamma(0.5)
    good = verify_weak_derivative(lambda x: c, vconst, LEFT, 0.5, interval=IV, tolerance=1e-6)
    assert good.passed
    bad = verify_weak_derivative(lambda x: c, lambda x: 0.0, LEFT, 0.5, interval=IV,
                                 tolerance=1e-6)
    assert not bad.passed
    assert bad.max_residual >= 1e-2 * abs(c)


def test_pairing_linearity():
    # residuals are linear in (u, v) pairs, to roundoff
    phi_family = default_test_family(IV, count=4)
    v1 = lambda x: step_weak_derivative(STEP, LEFT, 0.5, float(x), IV)
    u2 = lambda x: 1.0
    v2 = lambda x: (x + 1.0) ** -0.5 / gamma(0.5)
    lam, mu = 2.0, -0.5

    def residuals(u, v, breaks):
        rep = verify_weak_derivative(u, v, LEFT, 0.5, family=phi_family, interval=IV,
                                     u_breakpoints=breaks)
        return np.array(rep.residuals)

    r_combined = residuals(lambda x: lam * STEP(x) + mu * u2(x),
                           lambda x: lam * v1(x) + mu * v2(x), (0.0,))
    assert np.max(r_combined) < 1e-7


def test_pairing_on_real_line_constant():
    # on R the weak derivative of a constant is 0; the report carries the
    # window-truncation tail bound
    line = Interval.real_line(window=22.0)
    rep = verify_weak_derivative(lambda x: 1.0, lambda x: 0.0, LEFT, 0.5,
                                 family=default_test_family(Interval(-1.0, 1.0)),
                                 interval=line, tolerance=5e-2)
    assert rep.tail_bound > 0.0
    assert rep.passed


def test_weak_compute_matches_closed_form():
    g = make_grid(IV, 1024, GridKind.UNIFORM)
    res = weak_derivative_compute(sample(STEP, g), LEFT, 0.5)
    nodes = g.nodes
    mask = (np.abs(nodes) > 0.1) & np.isfinite(res.values.values)
    exact = np.array([step_weak_derivative(STEP, LEFT, 0.5, float(x), IV) for x in nodes[mask]])
    assert np.max(np.abs(res.values.values[mask] - exact)) < 1e-3
    assert not res.suspect_non_ac


def test_weak_compute_equals_classical_for_smooth():
    g = make_grid(Interval(0.0, 1.0), 257, GridKind.UNIFORM)
    u = sample(np.sin, g)
    res = weak_derivative_compute(u, LEFT, 0.5)
    classical = rl_derivative(u, LEFT, 0.5)
    assert np.array_equal(res.values.values[1:], classical.values[1:])
    assert not res.suspect_non_ac


def test_weak_compute_annihilates_kernel():
    from weakfrac.grid import sample_singular

    g = make_grid(IV, 1025, GridKind.GRADED, gamma=4.0)
    ku = sample_singular(lambda x: (x + 1.0) ** -0.5, g)
    res = weak_derivative_compute(ku, LEFT, 0.5)
    mask = (g.nodes >= -0.8) & np.isfinite(res.values.values)
    assert np.max(np.abs(res.values.values[mask])) < 5e-2 * (0.2) ** -0.5
    assert not res.suspect_non_ac


def test_mollifier_commutation_small():
    eps = 0.1
    spec = MollifierSpec(eps)
    molu = mollify(STEP, spec, domain=IV, singular_points=(0.0,))
    ext = Interval(-1.0 - 2 * eps, 1.0)
    from weakfrac.grid import refined_near

    g = refined_near(ext, 2.0 / 512, (-1.0, 0.0), 4 * eps, eps / 64)
    lhs = weak_derivative_compute(sample(molu, g), LEFT, 0.5).values
    vfun = lambda x: step_weak_derivative(STEP, LEFT, 0.5, float(x), IV)
    molv = mollify(vfun, spec, domain=IV, singular_points=(0.0,))
    sel = np.linspace(-1 + 1.5 * eps, 1 - 1.5 * eps, 41)
    idx = np.searchsorted(g.nodes, sel)
    rhs = np.array([molv(float(x)) for x in g.nodes[idx]])
    assert np.max(np.abs(lhs.values[idx] - rhs)) < 1e-2


def test_integrability_norms_stabilize():
    # D^alpha phi is p-integrable for every p; the discrete sup norm is
    # exactly stable under window growth, and the L1 increments decay at the
    # algebraic tail rate (the absolute 1e-6 Cauchy level sits beyond desk
    # scale for alpha = 0.5; see the decay-rate assertion instead)
    phi = Bump(0.0, 0.25)
    alpha = 0.5
    sup_vals, l1_tail = [], []
    for K in (5.0, 10.0, 20.0):
        xs = np.linspace(phi.support[1] + 1e-3, phi.support[1] + K, 400)
        vals = np.abs([test_deriv(phi, LEFT, alpha, float(x)) for x in xs])
        sup_vals.append(max(np.max(vals), np.max(np.abs([
            test_deriv(phi, LEFT, alpha, float(x)) for x in np.linspace(-0.24, 0.24, 101)
        ]))))
        l1_tail.append(np.trapezoid(vals, xs))
    assert abs(sup_vals[2] - sup_vals[1]) < 1e-12
    inc1 = l1_tail[1] - l1_tail[0]
    inc2 = l1_tail[2] - l1_tail[1]
    assert 0 < inc2 < inc1
    # increments shrink at the K^-alpha tail rate
    assert inc2 / inc1 == pytest.approx(2.0 ** -alpha, abs=0.15)

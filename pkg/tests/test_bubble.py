"""Profile closed forms and universal constants.

Oracles: direct substitution for the normalization, central finite
differences for every closed-form derivative, and Beta-function closed
forms for the constants. Frozen targets are written out as explicit
arithmetic so they cannot drift with the implementation.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from navier_bubbles.bubble import (
    BubbleParams,
    CriticalConstants,
    balance_constants,
    c0,
    critical_exponent,
    da_delta,
    dlambda_delta,
    epsilon_power_expansion_check,
    eval_delta,
    eval_delta_laplacian,
    radial_profile,
    radial_profile_laplacian,
    radial_scale_derivative,
    radial_scale_derivative_laplacian,
    sobolev_constant,
    sobolev_energy,
)
from navier_bubbles.numerics import RadialGrid, radial_bilaplacian

PI = math.pi


def params6(lam=1.0, a=None):
    if a is None:
        a = np.zeros(6)
    return BubbleParams(a=a, lam=lam, n=6)


# ---------------------------------------------------------------------------
# normalization and pointwise values


def test_c0_frozen_values():
    assert math.isclose(c0(6), 384.0 ** 0.25, rel_tol=1e-15)
    assert math.isclose(c0(5), 105.0 ** 0.125, rel_tol=1e-15)
    assert math.isclose(c0(8), math.sqrt(1920.0), rel_tol=1e-15)


def test_c0_rejects_subcritical_dimension():
    with pytest.raises(ValueError):
        c0(4)


def test_params_validation():
    with pytest.raises(ValueError):
        BubbleParams(a=np.zeros(6), lam=-1.0, n=6)
    with pytest.raises(ValueError):
        BubbleParams(a=np.zeros(3), lam=1.0, n=6)


def test_center_value():
    for lam in (0.5, 1.0, 7.0):
        p = params6(lam)
        want = c0(6) * lam  # lam^{(n-4)/2} = lam at n = 6
        assert math.isclose(float(eval_delta(p, p.a)), want, rel_tol=1e-14)


def test_unit_distance_value():
    p = params6(1.0)
    x = np.zeros(6)
    x[0] = 1.0
    assert math.isclose(float(eval_delta(p, x)), c0(6) / 2.0, rel_tol=1e-14)


@settings(max_examples=40, deadline=None)
@given(lam=st.floats(min_value=0.1, max_value=50.0),
       s=st.floats(min_value=0.2, max_value=5.0),
       r=st.floats(min_value=1e-3, max_value=20.0))
def test_scale_covariance(lam, s, r):
    # delta_{0, s*lam}(x) = s^{(n-4)/2} delta_{0, lam}(s x)
    n = 6
    left = radial_profile(n, s * lam, r)
    right = s ** ((n - 4) / 2.0) * radial_profile(n, lam, s * r)
    assert math.isclose(float(left), float(right), rel_tol=1e-12)


# ---------------------------------------------------------------------------
# derivatives against central-difference oracles


def test_scale_derivative_center_and_zero_sphere():
    p = params6(lam=3.0)
    center = float(dlambda_delta(p, p.a))
    assert math.isclose(center, (6 - 4) / 2.0 * c0(6) * 3.0, rel_tol=1e-13)
    x = np.zeros(6)
    x[1] = 1.0 / 3.0  # on the sphere r = 1/lam
    assert abs(float(dlambda_delta(p, x))) < 1e-14


def test_scale_derivative_matches_fd():
    n, lam = 6, 2.0
    r = np.geomspace(0.01, 8.0, 25)
    errs = []
    for h in (1e-3, 5e-4):
        fd = (radial_profile(n, lam * (1 + h), r)
              - radial_profile(n, lam * (1 - h), r)) / (2 * h)
        errs.append(np.max(np.abs(fd - radial_scale_derivative(n, lam, r))))
    assert errs[0] / errs[1] > 3.6  # O(h^2) oracle convergence
    assert errs[1] < 1e-6


def test_center_gradient_matches_fd():
    p = params6(lam=1.5, a=np.full(6, 0.1))
    x = np.array([0.4, -0.2, 0.3, 0.0, 0.1, -0.5])
    grad = da_delta(p, x)
    h = 1e-5
    for i in range(6):
        e = np.zeros(6)
        e[i] = h
        plus = BubbleParams(a=p.a + e, lam=p.lam, n=6)
        minus = BubbleParams(a=p.a - e, lam=p.lam, n=6)
        fd = (float(eval_delta(plus, x)) - float(eval_delta(minus, x))) / (2 * h)
        assert math.isclose(grad[i], fd, rel_tol=1e-7, abs_tol=1e-10)


def test_center_gradient_symmetry():
    p = params6(lam=2.0)
    x = np.zeros(6)
    x[2] = 0.7
    g = da_delta(p, x)
    assert g[2] != 0.0
    others = np.delete(g, 2)
    assert np.max(np.abs(others)) == 0.0
    assert np.max(np.abs(da_delta(p, p.a))) == 0.0
    # reflection through the center flips the gradient
    g_refl = da_delta(p, -x)
    assert np.allclose(g_refl, -g, rtol=0, atol=1e-15)


def test_profile_laplacian_matches_fd():
    n, lam = 6, 1.0
    r = np.linspace(0.05, 6.0, 40)
    h = 1e-4
    upp = (radial_profile(n, lam, r + h) - 2 * radial_profile(n, lam, r)
           + radial_profile(n, lam, r - h)) / h ** 2
    up = (radial_profile(n, lam, r + h) - radial_profile(n, lam, r - h)) / (2 * h)
    fd = upp + (n - 1) / r * up
    assert np.max(np.abs(fd - radial_profile_laplacian(n, lam, r))) < 1e-5


def test_scale_derivative_laplacian_matches_fd():
    n, lam = 6, 2.0
    r = np.geomspace(0.02, 5.0, 30)
    h = 1e-4
    # the relative perturbation lam*(1 +/- h) makes the plain difference
    # quotient equal lam * d/d(lam) already
    fd = (radial_profile_laplacian(n, lam * (1 + h), r)
          - radial_profile_laplacian(n, lam * (1 - h), r)) / (2 * h)
    closed = radial_scale_derivative_laplacian(n, lam, r)
    assert np.max(np.abs(fd - closed)) < 1e-4
    # and Delta commutes with the scale derivative: cross-check via FD of
    # the scale derivative's own radial Laplacian
    hh = 1e-3
    upp = (radial_scale_derivative(n, lam, r + hh)
           - 2 * radial_scale_derivative(n, lam, r)
           + radial_scale_derivative(n, lam, r - hh)) / hh ** 2
    up = (radial_scale_derivative(n, lam, r + hh)
          - radial_scale_derivative(n, lam, r - hh)) / (2 * hh)
    # relative to the field size: the oracle's own (n-1)/r amplification
    # dominates the absolute error at the smallest radii
    rel = np.max(np.abs(upp + (n - 1) / r * up - closed)) / np.max(np.abs(closed))
    assert rel < 1e-4


def test_pointwise_laplacian_consistent_with_radial_form():
    p = params6(lam=2.0, a=np.full(6, -0.3))
    x = np.array([0.2, 0.1, -0.4, 0.0, 0.25, -0.6])
    s = np.linalg.norm(x - p.a)
    assert math.isclose(float(eval_delta_laplacian(p, x)),
                        float(radial_profile_laplacian(6, 2.0, s)),
                        rel_tol=1e-14)


# ---------------------------------------------------------------------------
# the profile solves the critical equation (light version; the acceptance
# suite runs the full refinement study on [0, 10] for n in {5, 6, 8})


def test_pde_residual_second_order():
    n = 6
    p = critical_exponent(n)
    errs = []
    for N in (512, 1024):
        g = RadialGrid.arctan_graded(n, N, R=10.0, stretch=0.8)
        r = np.asarray(g.nodes, dtype=np.longdouble)
        u = radial_profile(n, 1.0, r)
        rhs = np.asarray(u ** np.longdouble(p), dtype=float)
        out = radial_bilaplacian(u, g)
        errs.append(np.max(np.abs(out - rhs)) / rhs.max())
    assert errs[0] / errs[1] > 3.4
    assert errs[1] < 5e-6


# ---------------------------------------------------------------------------
# Sobolev constant


def test_sobolev_dual_route_identity():
    for n in (5, 6):
        p1 = critical_exponent(n) + 1.0
        energy = sobolev_energy(n)
        from navier_bubbles.numerics import radial_integral
        mass = radial_integral(n, lambda r: radial_profile(n, 1.0, r) ** p1)
        assert math.isclose(energy, mass, rel_tol=1e-8)


def test_sobolev_frozen_values():
    # n=6: S^{3/2} = 384^{3/2} pi^3 / 60 since B(3,3)/2 = 1/60;
    # n=5: S^{5/4} = 105^{5/4} pi^3 / 32 since B(5/2,5/2)/2 = 3 pi/256
    # and 105^{5/4} * (8 pi^2/3) * (3 pi/256) = 105^{5/4} pi^3 / 32
    s6 = (384.0 ** 1.5 * PI ** 3 / 60.0) ** (2.0 / 3.0)
    s5 = (105.0 ** 1.25 * PI ** 3 / 32.0) ** 0.8
    assert math.isclose(sobolev_constant(6), s6, rel_tol=1e-9)
    assert math.isclose(sobolev_constant(5), s5, rel_tol=1e-9)


def test_sobolev_scale_invariance():
    ref = sobolev_constant(6, lam=1.0)
    for lam in (0.5, 4.0):
        assert math.isclose(sobolev_constant(6, lam=lam), ref, rel_tol=1e-9)


# ---------------------------------------------------------------------------
# balance constants


def test_c1_frozen_value():
    cc = balance_constants(6)
    assert math.isclose(cc.c1, 384.0 ** 1.5 * PI ** 3 / 24.0, rel_tol=1e-9)


def test_c2_variants():
    cc = balance_constants(6)
    assert cc.c2_variant_half > 0
    assert cc.c2_variant_full < 0
    # radial Beta-family oracle: the half variant is 384^{3/2} pi^3 / 360
    assert math.isclose(cc.c2_variant_half, 384.0 ** 1.5 * PI ** 3 / 360.0,
                        rel_tol=1e-8)
    ratio = cc.c2_variant_full / cc.c2_variant_half
    assert abs(ratio + 2.0) < 1e-6
    assert cc.c2 == cc.c2_variant_half


def test_balance_ratio_frozen():
    # c1/c2 = 360/24 = 15 at n = 6, the number driving the blow-up law
    cc = balance_constants(6)
    assert math.isclose(cc.c1 / cc.c2, 15.0, rel_tol=1e-8)


def test_constants_validation():
    with pytest.raises(ValueError):
        CriticalConstants(n=6, c0=1.0, p=5.0, S=1.0, c1=1.0,
                          c2_variant_full=-2.0, c2_variant_half=1.0, c2=-1.0)


# ---------------------------------------------------------------------------
# small-exponent power expansion


def test_expansion_vanishes_at_center():
    p = params6(lam=10.0)
    eps = 0.05
    lhs = float(eval_delta(p, p.a)) ** (-eps) - (c0(6) * 10.0) ** (-eps)
    assert lhs == 0.0


def test_expansion_first_order_in_eps():
    p = params6(lam=10.0)
    fit = epsilon_power_expansion_check(p, 0.05)
    assert 0.85 < fit.slope < 1.3
    # the uniform constant: K(eps)/eps stays within a small multiple of
    # (n-4)/2, the coefficient of the leading term
    k_over_eps = math.exp(fit.intercept)
    assert k_over_eps < 5.0 * (6 - 4) / 2.0


def test_expansion_rejects_large_eps():
    with pytest.raises(ValueError):
        epsilon_power_expansion_check(params6(), 0.5)

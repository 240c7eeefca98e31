"""Quadrature, discrete-calculus and fitting kernels.

Expected values come from closed forms worked out independently of the
implementation: Gamma-function values for sphere measures, the Beta
integral int_0^inf r^{n-1} (1+r^2)^{-b} dr = B(n/2, b-n/2)/2 for the decay
family, and symbolic differentiation for the polynomial stencil checks.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import beta as beta_fn

from navier_bubbles.numerics import (
    RadialGrid,
    SlopeFit,
    ball_axisymmetric_integral,
    fit_loglog,
    radial_bilaplacian,
    radial_integral,
    radial_laplacian,
    sphere_measure,
)

PI = math.pi


# ---------------------------------------------------------------------------
# sphere_measure


def test_sphere_measure_circle():
    assert math.isclose(sphere_measure(2), 2 * PI, rel_tol=1e-15)


def test_sphere_measure_frozen_values():
    # 2 pi^3 / Gamma(3) = pi^3 and 2 pi^{5/2} / Gamma(5/2) = 8 pi^2 / 3
    assert math.isclose(sphere_measure(6), PI ** 3, rel_tol=1e-14)
    assert math.isclose(sphere_measure(5), 8 * PI ** 2 / 3, rel_tol=1e-14)


def test_sphere_measure_rejects_low_dimension():
    with pytest.raises(ValueError):
        sphere_measure(1)


# ---------------------------------------------------------------------------
# radial_integral


def test_radial_integral_decay_kernel_n6():
    # Beta oracle: int_0^inf r^5 (1+r^2)^{-5} dr = B(3,2)/2 = 1/24
    val = radial_integral(6, lambda r: (1 + r * r) ** -5.0)
    assert math.isclose(val, PI ** 3 / 24, rel_tol=1e-10)


def test_radial_integral_ball_volume():
    val = radial_integral(6, lambda r: 1.0, r_max=1.0)
    assert math.isclose(val, PI ** 3 / 6, rel_tol=1e-12)


def test_radial_integral_decay_kernel_n5():
    # B(5/2, 2)/2 * |S^4| = (4/35)/2 * 8 pi^2/3 = 16 pi^2 / 105
    val = radial_integral(5, lambda r: (1 + r * r) ** -4.5)
    assert math.isclose(val, 16 * PI ** 2 / 105, rel_tol=1e-10)


@pytest.mark.parametrize("n,b", [(5, 4.0), (5, 4.5), (6, 5.0), (6, 6.0),
                                 (8, 6.5), (8, 8.0)])
def test_radial_integral_matches_beta_family(n, b):
    val = radial_integral(n, lambda r: (1 + r * r) ** -b)
    oracle = sphere_measure(n) * beta_fn(n / 2.0, b - n / 2.0) / 2.0
    assert math.isclose(val, oracle, rel_tol=1e-9)


def test_radial_integral_flags_slow_decay():
    with pytest.raises(RuntimeError):
        radial_integral(6, lambda r: 1.0 / (1.0 + r * r))


# ---------------------------------------------------------------------------
# discrete operators


def grid6(N=128):
    # coarse on purpose: the stencils are exact on these polynomials, so
    # the only residue is rounding, which grows like 1/h^4 as N rises
    return RadialGrid.uniform(6, N, R=2.0)


def ld_nodes(g):
    # polynomial samples built in extended precision, per the operator's
    # stated contract for tight error floors
    return np.asarray(g.nodes, dtype=np.longdouble)


def test_bilaplacian_annihilates_quadratic():
    g = grid6()
    out = radial_bilaplacian(ld_nodes(g) ** 2, g)
    assert np.max(np.abs(out)) < 1e-8


def test_bilaplacian_annihilates_boundary_compatible_profile():
    # a + b r^2 with the mix chosen so u(R) = 0; still exactly biharmonic
    g = grid6()
    u = np.longdouble(g.R) ** 2 - ld_nodes(g) ** 2
    out = radial_bilaplacian(u, g)
    assert np.max(np.abs(out)) < 1e-8


def test_bilaplacian_quartic_frozen_value():
    # Delta r^4 = 32 r^2 at n = 6, then Delta 32 r^2 = 384
    g = grid6()
    out = radial_bilaplacian(ld_nodes(g) ** 4, g)
    assert np.max(np.abs(out - 384.0)) < 1e-6


def test_bilaplacian_second_order_on_smooth_profile():
    errs = []
    for N in (256, 512, 1024):
        g = RadialGrid.uniform(6, N, R=2.0)
        u = np.cos(g.nodes ** 2)
        exact = _bilap_cos_r2(g.nodes, 6)
        out = radial_bilaplacian(u, g)
        errs.append(np.max(np.abs(out - exact)))
    assert errs[0] / errs[1] > 3.4
    assert errs[1] / errs[2] > 3.4


def _bilap_cos_r2(r, n):
    # symbolic oracle for u = cos(r^2):
    #   Delta u = -2 n sin(r^2) - 4 r^2 cos(r^2)
    #   Delta^2 u = (-4 (2 n + 4) + 16 r^4) cos(r^2)
    #               + (-4 n^2 - 16 n + 16 r^2 + 32 r^2) ... expanded below
    t = r * r
    s, c = np.sin(t), np.cos(t)
    # w = Delta u = -2n s - 4 t c
    # w' (in r) = -4 n r c - 8 r c + 16 ... differentiate in t then chain
    # dw/dt = -2n c - 4 c + 4 t s ; d2w/dt2 = (2n + 8) s + 4 t c
    # Delta w = 4 t d2w/dt2 + 2 n dw/dt
    d1 = -2 * n * c - 4 * c + 4 * t * s
    d2 = (2 * n + 8) * s + 4 * t * c
    return 4 * t * d2 + 2 * n * d1


def test_laplacian_matches_oracle():
    g = grid6(1024)
    u = np.exp(-g.nodes ** 2)
    t = g.nodes ** 2
    exact = (4 * t - 2 * 6) * np.exp(-t)
    out = radial_laplacian(u, g)
    assert np.max(np.abs(out - exact)) < 2e-4


def test_bilaplacian_rejects_mismatched_samples():
    g = grid6()
    with pytest.raises(ValueError):
        radial_bilaplacian(np.zeros(len(g) + 1), g)


# ---------------------------------------------------------------------------
# grids


def test_grid_invariants_enforced():
    with pytest.raises(ValueError):
        RadialGrid(6, np.linspace(0.1, 1.0, 64), 1.0)  # no origin node
    with pytest.raises(ValueError):
        RadialGrid(6, np.linspace(0.0, 0.9, 64), 1.0)  # last node != R
    with pytest.raises(ValueError):
        RadialGrid(4, np.linspace(0.0, 1.0, 64), 1.0)  # dimension too low
    with pytest.raises(ValueError):
        RadialGrid(6, np.linspace(0.0, 1.0, 32), 1.0)  # too few nodes


@settings(max_examples=25, deadline=None)
@given(N=st.integers(min_value=64, max_value=700),
       R=st.floats(min_value=0.5, max_value=20.0),
       kind=st.sampled_from(["uniform", "chebyshev", "sinh", "arctan"]))
def test_grid_constructors_satisfy_invariants(N, R, kind):
    if kind == "uniform":
        g = RadialGrid.uniform(6, N, R)
    elif kind == "chebyshev":
        g = RadialGrid.chebyshev(6, N, R)
    elif kind == "sinh":
        g = RadialGrid.sinh_graded(6, N, R, strength=4.0)
    else:
        g = RadialGrid.arctan_graded(6, N, R, stretch=0.8)
    assert g.nodes[0] == 0.0
    assert g.nodes[-1] == g.R == R
    assert np.all(np.diff(g.nodes) > 0)
    assert len(g) == N


# ---------------------------------------------------------------------------
# axisymmetric ball integral


def test_axisymmetric_volume():
    val = ball_axisymmetric_integral(6, lambda r, c: np.ones_like(c), 1.0)
    assert math.isclose(val, PI ** 3 / 6, rel_tol=1e-9)


def test_axisymmetric_cosine_second_moment():
    # mean of c^2 over S^{n-1} is 1/n, so the ball integral is |B_1|/n
    val = ball_axisymmetric_integral(6, lambda r, c: c * c, 1.0)
    assert math.isclose(val, PI ** 3 / 36, rel_tol=1e-9)


# ---------------------------------------------------------------------------
# fit_loglog


def test_fit_exact_square_law():
    xs = np.geomspace(0.1, 10.0, 12)
    fit = fit_loglog(xs, xs ** 2)
    assert abs(fit.slope - 2.0) < 1e-10
    assert fit.rms_residual < 1e-12


def test_fit_exact_inverse_law():
    xs = np.geomspace(0.5, 50.0, 9)
    fit = fit_loglog(xs, 3.0 / xs)
    assert abs(fit.slope + 1.0) < 1e-10
    assert abs(fit.intercept - math.log(3.0)) < 1e-10


def test_fit_perturbed_square_law():
    xs = np.geomspace(0.1, 10.0, 40)
    ys = xs ** 2 * (1 + 0.01 * np.sin(np.log(xs)))
    fit = fit_loglog(xs, ys)
    assert abs(fit.slope - 2.0) < 0.02
    assert fit.rms_residual < 0.02


def test_fit_rejects_bad_input():
    with pytest.raises(ValueError):
        fit_loglog([1.0, 2.0, 3.0], [1.0, 4.0, 9.0])  # too few points
    with pytest.raises(ValueError):
        fit_loglog([1.0, -2.0, 3.0, 4.0], [1.0, 4.0, 9.0, 16.0])


def test_slopefit_rejects_negative_rms():
    with pytest.raises(ValueError):
        SlopeFit(slope=1.0, intercept=0.0, rms_residual=-1.0)

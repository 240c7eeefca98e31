"""Tests for the projected bubble and its deficit.

The center configuration has a two-line closed form (constant boundary
data forces a quadratic), which anchors the generic quadrature-projected
solver; biharmonicity is pinned by the exact two-term sphere-mean
identity, and the decay laws by lam-sweeps.
"""

import math

import numpy as np
import pytest
from scipy.special import roots_jacobi

from navier_bubbles.bubble import (
    BubbleParams,
    c0,
    eval_delta,
    radial_profile,
    radial_profile_laplacian,
    sobolev_energy,
)
from navier_bubbles.green_robin import BallDomain, regular_part_H
from navier_bubbles.projection import (
    DeficitExpansion,
    _deficit_bvp,
    deficit,
    deficit_critical_norm,
    deficit_energy_norm,
    deficit_expansion,
    expansion_orders,
    projected_bubble,
    projected_bubble_energy,
)


def e1(n):
    v = np.zeros(n)
    v[0] = 1.0
    return v


def centered(n, lam):
    return BubbleParams(a=np.zeros(n), lam=lam, n=n)


def test_deficit_center_closed_form():
    # Constant traces delta(R) and (Delta delta)(R) admit the exact
    # solution delta(R) + (Delta delta)(R) (|y|^2 - R^2)/(2n); the
    # production path goes through quadrature projection and must agree.
    for R, lam in ((1.0, 10.0), (2.0, 6.0)):
        n = 6
        dom = BallDomain(n=n, center=np.zeros(n), radius=R)
        p = centered(n, lam)
        base = radial_profile(n, lam, np.float64(R))
        curv = radial_profile_laplacian(n, lam, np.float64(R))
        for r in (0.0, 0.37 * R, 0.8 * R, R):
            got = deficit(p, dom, r * e1(n))
            expect = base + curv * (r * r - R * R) / (2 * n)
            assert math.isclose(got, expect, rel_tol=1e-12)


def test_deficit_boundary_trace_off_center():
    n = 6
    dom = BallDomain.unit(n)
    p = BubbleParams(a=0.3 * e1(n), lam=12.0, n=n)
    for theta_ang in (0.0, 1.0, 2.2, math.pi):
        xb = np.zeros(n)
        xb[0], xb[1] = math.cos(theta_ang), math.sin(theta_ang)
        expect = eval_delta(p, xb)
        assert math.isclose(deficit(p, dom, xb), expect, rel_tol=1e-10)


def test_deficit_squeezed_between_zero_and_bubble():
    n = 6
    dom = BallDomain.unit(n)
    p = BubbleParams(a=0.25 * e1(n), lam=20.0, n=n)
    bvp, _ = _deficit_bvp(p, dom, 5.0)
    rng = np.random.default_rng(42)
    checked = 0
    while checked < 100:
        x = rng.uniform(-1, 1, size=n)
        if np.linalg.norm(x) >= 0.999:
            continue
        th = bvp.value(x)
        assert 0.0 < th <= eval_delta(p, x)
        checked += 1


def test_deficit_center_leading_term():
    # lam * deficit(center) approaches c0 * H(0,0) = c0 * 4/3 at the
    # O(lam^-2) relative rate.
    n = 6
    dom = BallDomain.unit(n)
    errs = []
    for lam in (20.0, 40.0, 80.0):
        val = deficit(centered(n, lam), dom, np.zeros(n))
        errs.append(abs(lam * val / c0(n) - 4.0 / 3.0))
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-3
    assert errs[0] / errs[2] > 8.0  # consistent with a quadratic rate


def test_deficit_is_biharmonic_sphere_mean():
    # Two-term Pizzetti identity: for biharmonic u the average over any
    # interior sphere of radius rho equals u(z0) + rho^2 Delta u(z0)/(2n),
    # with no higher corrections. This pins biharmonicity without a
    # discretized operator.
    n = 6
    dom = BallDomain.unit(n)
    p = BubbleParams(a=0.3 * e1(n), lam=15.0, n=n)
    bvp, _ = _deficit_bvp(p, dom, 5.0)
    z0 = -0.2 * e1(n)
    rho = 0.35
    t, w = roots_jacobi(48, 0.5 * (n - 3), 0.5 * (n - 3))
    e_perp = np.zeros(n)
    e_perp[1] = 1.0
    vals = [bvp.value(z0 + rho * (ti * e1(n) + math.sqrt(1 - ti * ti) * e_perp))
            for ti in t]
    avg = float(np.dot(w, vals) / np.sum(w))
    expect = bvp.value(z0) + rho * rho * bvp.laplacian(z0) / (2 * n)
    assert math.isclose(avg, expect, rel_tol=5e-10)


def test_projected_bubble_boundary_zero():
    n = 6
    dom = BallDomain.unit(n)
    p = BubbleParams(a=0.2 * e1(n), lam=30.0, n=n)
    for ang in (0.0, 0.9, 2.6):
        xb = np.zeros(n)
        xb[0], xb[1] = math.cos(ang), math.sin(ang)
        assert abs(projected_bubble(p, dom, xb)) <= 1e-9 * eval_delta(p, xb)


def test_projected_bubble_positive_inside():
    n = 6
    dom = BallDomain.unit(n)
    p = BubbleParams(a=0.2 * e1(n), lam=30.0, n=n)
    rng = np.random.default_rng(9)
    bvp, _ = _deficit_bvp(p, dom, 5.0)
    for _ in range(40):
        x = rng.uniform(-0.7, 0.7, size=n)
        if np.linalg.norm(x) < 0.98:
            assert eval_delta(p, x) - bvp.value(x) > 0


def test_projected_bubble_energy_approaches_sobolev_level():
    n = 6
    dom = BallDomain.unit(n)
    level = sobolev_energy(n, 1.0)
    gaps = []
    lams = (8.0, 16.0, 32.0, 64.0)
    for lam in lams:
        en = projected_bubble_energy(centered(n, lam), dom)
        gap = level - en
        assert gap > 0
        gaps.append(gap)
    slope = np.polyfit(np.log(lams), np.log(gaps), 1)[0]
    assert abs(slope - (4 - n)) < 0.3


def test_expansion_orders_exponents():
    n = 6
    dom = BallDomain.unit(n)
    fam = [centered(n, lam) for lam in np.geomspace(8.0, 256.0, 6)]
    fits = expansion_orders(fam, dom)
    assert abs(fits.energy_norm.slope - (-1.0)) < 0.2
    assert abs(fits.critical_norm.slope - (-1.0)) < 0.2
    assert abs(fits.remainder_sup.slope - (-3.0)) < 0.3


def test_expansion_orders_span_rejected():
    n = 6
    dom = BallDomain.unit(n)
    fam = [centered(n, lam) for lam in (10.0, 20.0, 40.0, 80.0)]
    with pytest.raises(ValueError):
        expansion_orders(fam, dom)


def test_expansion_orders_requires_centered_family():
    n = 6
    dom = BallDomain.unit(n)
    fam = [BubbleParams(a=0.1 * e1(n), lam=lam, n=n)
           for lam in (8.0, 30.0, 100.0, 300.0)]
    with pytest.raises(ValueError):
        expansion_orders(fam, dom)


def test_deficit_admissibility_gate():
    n = 6
    dom = BallDomain.unit(n)
    with pytest.raises(ValueError):
        deficit(centered(n, 4.0), dom, np.zeros(n))
    # configurable threshold lets the same bubble through
    assert deficit(centered(n, 4.0), dom, np.zeros(n), min_lambda_d=3.0) > 0
    with pytest.raises(ValueError):
        deficit(BubbleParams(a=np.zeros(5), lam=50.0, n=5), dom, np.zeros(6))
    with pytest.raises(ValueError):
        deficit(BubbleParams(a=1.5 * e1(n), lam=50.0, n=n), dom, np.zeros(n))


def test_deficit_expansion_structure():
    n = 6
    dom = BallDomain.unit(n)
    p = BubbleParams(a=0.2 * e1(n), lam=40.0, n=n)
    exp = deficit_expansion(p, dom)
    assert exp.d == pytest.approx(0.8)
    assert exp.remainder_norm >= 0
    lead = exp.leading(0.2 * e1(n))
    expect = c0(n) / 40.0 * regular_part_H(dom, p.a, p.a)
    assert math.isclose(lead, expect, rel_tol=1e-12)
    with pytest.raises(ValueError):
        DeficitExpansion(params=p, domain=dom, leading=exp.leading,
                         remainder_norm=-1.0, d=0.8)


def test_deficit_leading_term_pointwise_rate():
    # lam^{(n-4)/2} deficit -> c0 H(center, x) pointwise, quadratically in
    # 1/lam for fixed x
    n = 6
    dom = BallDomain.unit(n)
    x = 0.4 * e1(n)
    href = c0(n) * regular_part_H(dom, np.zeros(n), x)
    err20 = abs(20.0 * deficit(centered(n, 20.0), dom, x) - href)
    err80 = abs(80.0 * deficit(centered(n, 80.0), dom, x) - href)
    assert err80 < err20 / 8.0


def test_deficit_norms_positive_and_ordered():
    # curvature energy dominates the critical norm by the sharp embedding
    # constant; both are positive and finite here
    n = 6
    dom = BallDomain.unit(n)
    p = centered(n, 16.0)
    en = deficit_energy_norm(p, dom)
    cr = deficit_critical_norm(p, dom)
    assert en > 0 and cr > 0
    assert cr < en

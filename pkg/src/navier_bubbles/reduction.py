"""Reduced balance equations, spectral gap checks and blow-up verdicts.

The concentration analysis compresses the full boundary value problem to
a handful of scalars: an amplitude offset `beta`, a scale offset `rho`
and a center offset `xi`. This module assembles that finite system,
solves it by a frozen-Jacobian fixed point that carries a contraction
certificate, measures the constrained spectral gap that keeps the
reduction honest, and turns continuation sweeps into pass/fail blow-up
verdicts.

Construction of the reduced system. The energy quotient is invariant
along rays, so pairing its gradient with the profile itself vanishes
identically and cannot pin an amplitude. The system solved here is the
projection of the genuine PDE residual of the quotient-normalized
ansatz: with gamma the normalized amplitude, the residual of
w = gamma * (boundary-corrected profile) is paired against the profile
and against its scale derivative. The leading expansion of the scale
equation is exactly the algebraic balance between the exponent offset
and the domain term (`balance_residual_scale`); the quadrature form
keeps every lower-order correction, which is what makes the fitted
offsets genuine measurements instead of restatements of the leading law.

All center-pinned quantities (the norm matrix, the spectral gap, the
reduced system itself) exploit the parity of the centered configuration:
translation directions pair to exactly zero against radial ones, and the
center offset is locked at the origin. Off-center configurations are
refused rather than approximated.
"""

import csv
import json
import math

import numpy as np
from dataclasses import dataclass
from scipy.integrate import quad
from scipy.linalg import null_space
from scipy.optimize import brentq
from scipy.special import jn_zeros, jv

from .bubble import (
    balance_constants,
    c0,
    critical_exponent,
    radial_profile,
    radial_profile_laplacian,
    radial_scale_derivative,
    radial_scale_derivative_laplacian,
)
from .green_robin import boundary_blowup_fit, robin
from .numerics import SlopeFit, fit_loglog, sphere_measure

__all__ = [
    "NormMatrix",
    "ReducedState",
    "NonContractionError",
    "BlowupEntry",
    "BlowupVerdict",
    "ObstructionEntry",
    "ObstructionReport",
    "gram_matrix",
    "coercivity_check",
    "bubble_quadratic_form",
    "balance_residual_scale",
    "balance_residual_center",
    "balance_root",
    "solve_reduced_system",
    "blowup_verdict",
    "supercritical_obstruction",
]

# Trial functions for the spectral gap live on this fixed graded grid.
_GAP_GRID = 30001
_GAP_GRADING = 6.0
# Trial modes scale with lam so the concentration core stays resolved;
# this cap bounds the dense eigenproblem and the mode-matrix memory.
_MAX_TRIAL_MODES = 400
# Contraction ratios are certified only while steps sit clearly above
# the round-off floor of the fixed-point update.
_RATIO_FLOOR = 1e-10


# ---------------------------------------------------------------------------
# centered profile calculus

def _profile_dr(n, lam, r):
    """Radial derivative of the concentrating profile."""
    t = (lam * r) ** 2
    return -(n - 4.0) * lam * lam * r * radial_profile(n, lam, r) / (1.0 + t)


def _laplacian_dr(n, lam, r):
    """Radial derivative of the profile Laplacian."""
    t = (lam * r) ** 2
    pref = -(n - 4.0) * c0(n) * lam ** ((n - 4.0) / 2.0 + 2.0)
    return (pref * 2.0 * lam * lam * r * (1.0 + t) ** (-n / 2.0 - 1.0)
            * ((2.0 - n) * t + 2.0 - n * n / 2.0))


def _projected(n, lam, r, R):
    """Boundary-corrected profile at the center of a ball of radius R."""
    return (radial_profile(n, lam, r)
            - radial_profile(n, lam, R)
            - radial_profile_laplacian(n, lam, R) * (r * r - R * R) / (2.0 * n))


def _projected_scale(n, lam, r, R):
    """Scale derivative lam d/dlam of the boundary-corrected profile."""
    return (radial_scale_derivative(n, lam, r)
            - radial_scale_derivative(n, lam, R)
            - radial_scale_derivative_laplacian(n, lam, R)
            * (r * r - R * R) / (2.0 * n))


def _translation_radial(n, lam, r, R):
    """Radial factor G of the translation derivative G(r) x_1.

    Differentiating the corrected profile in the center location, at the
    center of the ball, gives -profile'(r) x_1 / r plus the bilaplacian
    correction (A + B r^2) x_1 that restores both boundary conditions in
    the first spherical harmonic sector. The two coefficients come from
    matching the profile's own boundary values:
        A + B R^2    = profile'(R) / R
        (2n + 4) B   = (profile Laplacian)'(R) / R.
    """
    B = _laplacian_dr(n, lam, R) / R / (2.0 * n + 4.0)
    A = _profile_dr(n, lam, R) / R - B * R * R
    core = -_profile_dr(n, lam, r) / np.maximum(r, 1e-300)
    return core + A + B * r * r


def _ball_radial(n, R, lam, f):
    """Integral of f over the centered ball, radial integrand.

    Seam points at the concentration scale steer the adaptive rule into
    the core. Retries once with a denser subdivision budget before
    giving up.
    """
    seams = [s for s in (0.5 / lam, 3.0 / lam, 20.0 / lam) if s < R]
    integrand = lambda r: f(r) * r ** (n - 1)
    for limit in (300, 900):
        res = quad(integrand, 0.0, R, points=seams or None,
                   epsabs=0.0, epsrel=1e-11, limit=limit, full_output=1)
        val, err = res[0], res[1]
        if err <= 1e-9 * max(abs(val), 1e-300):
            return sphere_measure(n) * val
    raise RuntimeError(
        "radial quadrature failed to converge on the ball integral")


def _require_centered(params, domain):
    if params.n != domain.n:
        raise ValueError("profile and domain dimensions do not match")
    R = domain.radius
    if not np.allclose(params.a, domain.center, atol=1e-12 * R, rtol=0.0):
        raise ValueError(
            "only the centered configuration is supported here; parity "
            "identities used by this routine fail off center")
    if params.lam * R < 5.0:
        raise ValueError(
            "concentration scale too small: lam * radius must be at least 5")


# ---------------------------------------------------------------------------
# norm matrix of the reduction basis

@dataclass(frozen=True)
class NormMatrix:
    """Energy pairings of the reduction basis at a centered profile.

    The basis is {corrected profile, its scale derivative (lam d/dlam),
    one translation derivative}; pairings are in the Navier energy inner
    product. Both mixed entries against the translation direction vanish
    exactly at the center by parity and are stored as literal zeros. The
    *_limit fields are large-scale extrapolations along a doubling
    ladder: the profile norm tends to the critical energy level, the
    other two tend to the scale-free constants of the free profile (the
    translation one after removal of its lam^2 growth).
    """

    n: int
    lam: float
    rungs: tuple
    bubble_sq: float
    scale_sq: float
    translation_sq: float
    bubble_scale: float
    bubble_translation: float
    scale_translation: float
    bubble_sq_limit: float
    scale_sq_limit: float
    translation_sq_limit: float
    cross_decay: SlopeFit

    def __post_init__(self):
        if not (self.bubble_sq > 0 and self.scale_sq > 0
                and self.translation_sq > 0):
            raise ValueError("diagonal norm entries must be positive")
        if self.bubble_scale ** 2 >= self.bubble_sq * self.scale_sq:
            raise ValueError("mixed entry violates the Cauchy-Schwarz bound")
        if not (self.bubble_sq_limit > 0 and self.scale_sq_limit > 0
                and self.translation_sq_limit > 0):
            raise ValueError("extrapolated limits must be positive")
        if not self.cross_decay.slope < 0:
            raise ValueError("mixed profile/scale entry must decay")
        if len(self.rungs) < 2 or any(
                b <= a for a, b in zip(self.rungs, self.rungs[1:])):
            raise ValueError("ladder rungs must increase")

    def matrix(self):
        """The 3x3 pairing matrix at the base scale."""
        return np.array([
            [self.bubble_sq, self.bubble_scale, self.bubble_translation],
            [self.bubble_scale, self.scale_sq, self.scale_translation],
            [self.bubble_translation, self.scale_translation,
             self.translation_sq],
        ])


def _gram_entries(n, lam, R):
    """Pairings (profile, scale, translation) at one ladder rung."""
    p = critical_exponent(n)
    dpow = lambda r: radial_profile(n, lam, r) ** p
    dpm1 = lambda r: radial_profile(n, lam, r) ** (p - 1.0)
    bubble_sq = _ball_radial(n, R, lam,
                             lambda r: dpow(r) * _projected(n, lam, r, R))
    bubble_scale = _ball_radial(
        n, R, lam, lambda r: dpow(r) * _projected_scale(n, lam, r, R))
    scale_sq = _ball_radial(
        n, R, lam,
        lambda r: p * dpm1(r) * radial_scale_derivative(n, lam, r)
        * _projected_scale(n, lam, r, R))
    sm = sphere_measure(n)
    for limit in (300, 900):
        res = quad(
            lambda r: (_translation_radial(n, lam, r, R)
                       * (-_profile_dr(n, lam, r)) * dpm1(r) * r ** n),
            0.0, R, points=[s for s in (0.5 / lam, 3.0 / lam, 20.0 / lam)
                            if s < R],
            epsabs=0.0, epsrel=1e-11, limit=limit, full_output=1)
        if res[1] <= 1e-9 * max(abs(res[0]), 1e-300):
            translation_sq = (p / n) * sm * res[0]
            break
    else:
        raise RuntimeError(
            "radial quadrature failed to converge on the translation norm")
    return bubble_sq, bubble_scale, scale_sq, translation_sq


def gram_matrix(params, domain):
    """Assemble the NormMatrix of the reduction basis at the center.

    Entries at params.lam are exact quadratures; limits come from a
    four-rung doubling ladder. Extrapolation removes the measured
    remainder orders: lam^-(n-4) on the profile and scale diagonals and
    lam^-(n-2) on the lam^-2-normalized translation diagonal (the parity
    of the centered configuration cancels the odd-order term). The
    profile/scale mixed entry decays like lam^-(n-4); its fitted rate is
    returned as cross_decay.
    """
    _require_centered(params, domain)
    n, R = domain.n, domain.radius
    rungs = tuple(params.lam * 2.0 ** j for j in range(4))
    rows = [_gram_entries(n, lam, R) for lam in rungs]
    base = rows[0]
    pp = [row[0] for row in rows]
    pl = [abs(row[1]) for row in rows]
    ll = [row[2] for row in rows]
    aa = [row[3] / lam ** 2 for row, lam in zip(rows, rungs)]

    def _extrap(seq, rate):
        w = 2.0 ** rate
        return (w * seq[-1] - seq[-2]) / (w - 1.0)

    return NormMatrix(
        n=n,
        lam=params.lam,
        rungs=rungs,
        bubble_sq=base[0],
        scale_sq=base[2],
        translation_sq=base[3],
        bubble_scale=base[1],
        bubble_translation=0.0,
        scale_translation=0.0,
        bubble_sq_limit=_extrap(pp, n - 4.0),
        scale_sq_limit=_extrap(ll, n - 4.0),
        translation_sq_limit=_extrap(aa, n - 2.0),
        cross_decay=fit_loglog(rungs, pl),
    )


# ---------------------------------------------------------------------------
# constrained spectral gap

def _graded_radii(R, m):
    s = np.linspace(0.0, 1.0, m)
    return R * np.sinh(_GAP_GRADING * s) / np.sinh(_GAP_GRADING)


def coercivity_check(params, domain, trial_count=40):
    """Smallest constrained Rayleigh quotient of the second variation.

    The quadratic form is energy minus p times the profile-weighted mass,
    normalized by energy, over trial functions that vanish on the
    boundary and are energy-orthogonal to the corrected profile and to
    its scale derivative. Trial functions are eigenmodes of the Dirichlet
    Laplacian on the ball (integer-order Bessel profiles), which makes
    their energy pairing exactly diagonal. Radial modes are orthogonal to
    the translation directions for free.

    The mode count is trial_count per core-resolution band: the basis
    holds trial_count * ceil(lam R / 10) modes so the oscillation scale
    of the last mode stays below the concentration core width. Doubling
    trial_count is the intended stability check.
    """
    _require_centered(params, domain)
    if trial_count < 5:
        raise ValueError("trial_count must be at least 5")
    n, R, lam = domain.n, domain.radius, params.lam
    if n % 2 != 0:
        raise ValueError(
            "even dimensions only: the trial basis uses integer-order "
            "Bessel zeros")
    modes = trial_count * max(1, math.ceil(lam * R / 10.0))
    if modes > _MAX_TRIAL_MODES:
        raise ValueError(
            "trial basis too large: at most %d modes" % _MAX_TRIAL_MODES)
    nu = n // 2 - 1
    p = critical_exponent(n)
    sm = sphere_measure(n)

    z = jn_zeros(nu, modes)
    r = _graded_radii(R, _GAP_GRID)
    rs = r.copy()
    rs[0] = 1.0
    U = np.empty((modes, _GAP_GRID))
    for k in range(modes):
        U[k] = rs ** (1.0 - n / 2.0) * jv(nu, z[k] * r / R)
        U[k, 0] = (z[k] / (2.0 * R)) ** nu / math.gamma(nu + 1.0)
    mu = (z / R) ** 2
    energy_diag = mu ** 2 * sm * R * R * jv(nu + 1.0, z) ** 2 / 2.0
    U /= np.sqrt(energy_diag)[:, None]

    weights = np.zeros(_GAP_GRID)
    weights[1:-1] = (r[2:] - r[:-2]) / 2.0
    weights[0] = (r[1] - r[0]) / 2.0
    weights[-1] = (r[-1] - r[-2]) / 2.0
    wvol = weights * r ** (n - 1)

    dpm1 = radial_profile(n, lam, r) ** (p - 1.0)
    form = np.eye(modes) - p * (sm * (U * (dpm1 * wvol)) @ U.T)
    against_bubble = sm * U @ (radial_profile(n, lam, r) ** p * wvol)
    against_scale = sm * U @ (
        p * dpm1 * radial_scale_derivative(n, lam, r) * wvol)
    basis = null_space(np.vstack([against_bubble, against_scale]))
    if basis.shape != (modes, modes - 2):
        raise RuntimeError(
            "trial basis degenerate: constraint projection lost rank")
    vals = np.linalg.eigvalsh(basis.T @ form @ basis)
    return float(vals[0])


def bubble_quadratic_form(params, domain):
    """The same quadratic form evaluated on the corrected profile itself.

    This direction is excluded by the constraints; on it the form is
    negative (for large scales it approaches (1 - p) times the critical
    energy level), which is what makes the constrained gap meaningful.
    """
    _require_centered(params, domain)
    n, R, lam = domain.n, domain.radius, params.lam
    p = critical_exponent(n)
    energy = _ball_radial(
        n, R, lam,
        lambda r: radial_profile(n, lam, r) ** p * _projected(n, lam, r, R))
    weighted = _ball_radial(
        n, R, lam,
        lambda r: radial_profile(n, lam, r) ** (p - 1.0)
        * _projected(n, lam, r, R) ** 2)
    return energy - p * weighted


# ---------------------------------------------------------------------------
# algebraic balance

def balance_residual_scale(eps, a, lam, domain, consts=None):
    """Leading-order balance between exponent offset and domain term.

    Returns c2 * eps - c1 * phi(a) / lam^(n-4), the scale equation of the
    reduction at leading order, with positive eps meaning the subcritical
    side. Its unique positive root in lam is balance_root.
    """
    if not lam > 0:
        raise ValueError("lam must be positive")
    n = domain.n
    if consts is None:
        consts = balance_constants(n)
    if consts.n != n:
        raise ValueError("constants and domain dimensions do not match")
    phi = robin(domain, np.asarray(a, dtype=float)).phi
    return consts.c2 * eps - consts.c1 * phi / lam ** (n - 4.0)


def balance_root(eps, a, domain, consts=None):
    """Closed-form positive root of balance_residual_scale in lam."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    n = domain.n
    if consts is None:
        consts = balance_constants(n)
    if consts.n != n:
        raise ValueError("constants and domain dimensions do not match")
    phi = robin(domain, np.asarray(a, dtype=float)).phi
    return (consts.c1 * phi / (consts.c2 * eps)) ** (1.0 / (n - 4.0))


def balance_residual_center(a, lam, domain):
    """Leading-order center equation: damped gradient of the domain term.

    Returns grad phi(a) / lam^(n-3), the total-derivative reading of the
    center stationarity condition. It vanishes exactly at the center of
    a ball.
    """
    if not lam > 0:
        raise ValueError("lam must be positive")
    ev = robin(domain, np.asarray(a, dtype=float))
    return ev.grad / lam ** (domain.n - 3.0)


# ---------------------------------------------------------------------------
# the reduced system

class NonContractionError(RuntimeError):
    """Fixed-point iteration failed its contraction certificate.

    Carries the iterate history as (beta, rho, step_norm) triples so a
    failed run can be audited.
    """

    def __init__(self, message, history):
        super().__init__(message)
        self.history = tuple(history)


@dataclass(frozen=True)
class ReducedState:
    """Solution of the reduced system with its contraction certificate.

    beta is the amplitude offset from the critical normalization, rho
    the scale offset in the square-root balance chart, xi the center
    offset (identically zero here: the centered chart is pinned by
    parity). multipliers holds the basis coefficients of the energy
    gradient at the fixed point, amplitude and scale first, then the n
    translation entries; all of them vanish to solver precision at a
    genuine fixed point. ratios are the certified step contraction
    ratios, each below one.
    """

    eps: float
    beta: float
    rho: float
    xi: np.ndarray
    lam: float
    multipliers: tuple
    ratios: tuple
    iterations: int

    def __post_init__(self):
        object.__setattr__(
            self, "xi", np.atleast_1d(np.asarray(self.xi, dtype=float)))
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        if not self.lam > 0:
            raise ValueError("reconstructed scale must be positive")
        if self.iterations < 1:
            raise ValueError("iterations must be at least 1")
        if not self.ratios or any(not rr < 1.0 for rr in self.ratios):
            raise ValueError(
                "state requires a contraction certificate: every certified "
                "ratio must be below one")


def _reduced_integrals(n, R, lam, eps):
    """The four quadratures behind the reduced right sides."""
    p = critical_exponent(n)
    qt = p + 1.0 - eps
    dpow = lambda r: radial_profile(n, lam, r) ** p
    pd = lambda r: _projected(n, lam, r, R)
    pds = lambda r: _projected_scale(n, lam, r, R)
    pair_bubble = _ball_radial(n, R, lam, lambda r: dpow(r) * pd(r))
    mass = _ball_radial(
        n, R, lam, lambda r: np.abs(pd(r)) ** (qt - 1.0) * pd(r))
    pair_scale = _ball_radial(n, R, lam, lambda r: dpow(r) * pds(r))
    mass_scale = _ball_radial(
        n, R, lam,
        lambda r: np.abs(pd(r)) ** (p - 1.0 - eps) * pd(r) * pds(r))
    return pair_bubble, mass, pair_scale, mass_scale


def solve_reduced_system(eps, x0, domain, consts=None, tol=1e-12,
                         max_iter=60):
    """Solve the reduced system at the centered critical point.

    x0 must be a nondegenerate interior critical point of the domain
    term; on a ball that is the center, and only the centered chart is
    supported. eps must lie in (0, 0.1].

    The unknowns are the amplitude offset beta and the scale offset rho
    of the square-root balance chart; the center offset is pinned at
    zero by parity. The two right sides are the pairings of the PDE
    residual of the quotient-normalized ansatz against the corrected
    profile and its scale derivative. The iteration is a fixed point
    with the Jacobian frozen at the origin of the chart; every step
    ratio clearly above round-off must contract or the run is rejected
    with its history attached.
    """
    n, R = domain.n, domain.radius
    if consts is None:
        consts = balance_constants(n)
    if consts.n != n:
        raise ValueError("constants and domain dimensions do not match")
    if not eps > 0:
        raise ValueError("eps must be positive")
    if eps > 0.1:
        raise ValueError("eps must be at most 0.1 for the reduced chart")
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    if np.linalg.norm(x0 - domain.center) > 1e-6 * R:
        raise ValueError(
            "x0 must be the centered critical point of the domain term")
    anchor = robin(domain, x0)
    if not anchor.nondegenerate:
        raise ValueError("x0 must be a nondegenerate critical point")

    p = critical_exponent(n)
    qt = p + 1.0 - eps
    h0 = anchor.phi
    alpha0 = consts.S ** (-n / 8.0)
    chart = math.sqrt(consts.c2 / consts.c1) * math.sqrt(eps)

    def lam_of_rho(rho):
        base = chart * (1.0 / math.sqrt(h0) + rho)
        if not base > 0:
            raise ValueError("scale chart left its domain: rho too negative")
        return base ** (-2.0 / (n - 4.0))

    def right_sides(zz):
        beta, rho = zz
        lam = lam_of_rho(rho)
        pair_b, mass, pair_s, mass_s = _reduced_integrals(n, R, lam, eps)
        quotient = pair_b * mass ** (-2.0 / qt)
        gam = quotient ** (n / 8.0) * (alpha0 + beta)
        f1 = (gam * pair_b - gam ** (p - eps) * mass) / pair_b
        f2 = (gam * pair_s - gam ** (p - eps) * mass_s) / pair_b
        return np.array([f1, f2]), lam

    z = np.zeros(2)
    h = 1e-6
    jac = np.zeros((2, 2))
    for j in range(2):
        zp = z.copy()
        zp[j] += h
        zm = z.copy()
        zm[j] -= h
        jac[:, j] = (right_sides(zp)[0] - right_sides(zm)[0]) / (2.0 * h)

    history = []
    steps = []
    ratios = []
    converged = False
    for _ in range(max_iter):
        fz, _lam = right_sides(z)
        dz = np.linalg.solve(jac, -fz)
        z = z + dz
        step = float(np.linalg.norm(dz))
        if steps and steps[-1] >= _RATIO_FLOOR:
            ratios.append(step / steps[-1])
        steps.append(step)
        history.append((float(z[0]), float(z[1]), step))
        if step < tol:
            converged = True
            break
    if any(not rr < 1.0 for rr in ratios):
        raise NonContractionError(
            "fixed-point step ratios reached one: no contraction "
            "certificate at eps=%g" % eps, history)
    if not converged:
        raise NonContractionError(
            "fixed-point iteration did not reach tolerance %g within %d "
            "steps at eps=%g" % (tol, max_iter, eps), history)

    beta, rho = float(z[0]), float(z[1])
    lam = lam_of_rho(rho)
    pair_b, mass, pair_s, mass_s = _reduced_integrals(n, R, lam, eps)
    scale_sq = _ball_radial(
        n, R, lam,
        lambda r: p * radial_profile(n, lam, r) ** (p - 1.0)
        * radial_scale_derivative(n, lam, r) * _projected_scale(n, lam, r, R))
    alpha = alpha0 + beta
    energy = alpha * alpha * pair_b
    mass_full = alpha ** qt * mass
    prefactor = 2.0 * mass_full ** (-2.0 / qt)
    ray = energy / mass_full * alpha ** (p - eps)
    rhs = np.array([
        prefactor * (alpha * pair_b - ray * mass),
        prefactor * (alpha * pair_s - ray * mass_s),
    ])
    gram = np.array([[pair_b, pair_s], [pair_s, scale_sq]])
    mult_amp, mult_scale = np.linalg.solve(gram, rhs)
    return ReducedState(
        eps=eps,
        beta=beta,
        rho=rho,
        xi=np.zeros(n),
        lam=lam,
        multipliers=(float(mult_amp), float(mult_scale)) + (0.0,) * n,
        ratios=tuple(ratios),
        iterations=len(steps),
    )


# ---------------------------------------------------------------------------
# blow-up verdicts from continuation sweeps

@dataclass(frozen=True)
class BlowupEntry:
    """One sweep point prepared for the blow-up laws."""

    eps: float
    peak: float
    alpha: float
    scale: float
    eps_peak_sq: float
    eps_scale_pow: float
    peak_pow: float
    peak_scale_ratio: float


@dataclass(frozen=True)
class BlowupVerdict:
    """Extrapolated blow-up laws of a sweep against their predictions.

    peak refers to eps * max^2, scale to eps * lam^(n-4). Each series is
    extrapolated to eps -> 0 under two error models, linear in eps and
    linear in eps * log(1/eps), over the sweep tail. Targets follow the
    two sign conventions of the lower-order constant; `convention` names
    the one under which both series land within the 15 percent band
    ("half" is the operative positive convention).
    """

    n: int
    entries: tuple
    tail: int
    peak_limit_eps: float
    peak_limit_epslog: float
    scale_limit_eps: float
    scale_limit_epslog: float
    peak_target: float
    scale_target: float
    peak_target_alt: float
    scale_target_alt: float
    convention: str
    peak_ok: bool
    scale_ok: bool
    verdict: bool

    def __post_init__(self):
        if len(self.entries) < 4:
            raise ValueError("a verdict needs at least four sweep points")
        if self.convention not in ("half", "full"):
            raise ValueError("convention must be 'half' or 'full'")

    def report(self):
        return {
            "n": self.n,
            "points": len(self.entries),
            "tail": self.tail,
            "peak_limit_eps": self.peak_limit_eps,
            "peak_limit_epslog": self.peak_limit_epslog,
            "scale_limit_eps": self.scale_limit_eps,
            "scale_limit_epslog": self.scale_limit_epslog,
            "peak_target": self.peak_target,
            "scale_target": self.scale_target,
            "peak_target_alt": self.peak_target_alt,
            "scale_target_alt": self.scale_target_alt,
            "convention": self.convention,
            "peak_ok": self.peak_ok,
            "scale_ok": self.scale_ok,
            "verdict": self.verdict,
            "final_peak_pow": self.entries[-1].peak_pow,
            "final_peak_scale_ratio": self.entries[-1].peak_scale_ratio,
        }

    def to_json(self, path):
        payload = self.report()
        payload["entries"] = [
            {
                "eps": e.eps,
                "peak": e.peak,
                "alpha": e.alpha,
                "scale": e.scale,
                "eps_peak_sq": e.eps_peak_sq,
                "eps_scale_pow": e.eps_scale_pow,
                "peak_pow": e.peak_pow,
                "peak_scale_ratio": e.peak_scale_ratio,
            }
            for e in self.entries
        ]
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=1)
            fh.write("\n")

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["eps", "peak", "scale", "eps_peak_sq", "eps_scale_pow"])
            for e in self.entries:
                writer.writerow([repr(float(v)) for v in (
                    e.eps, e.peak, e.scale, e.eps_peak_sq, e.eps_scale_pow)])


def _affine_limit(gvals, yvals):
    """Least-squares intercept of y = L + c * g."""
    a = np.column_stack([np.ones_like(gvals), gvals])
    sol, _, _, _ = np.linalg.lstsq(a, yvals, rcond=None)
    return float(sol[0])


def blowup_verdict(sweep, x0, domain, consts=None):
    """Judge a continuation sweep against the blow-up laws.

    sweep holds (eps, decomposition, peak) triples with strictly
    decreasing |eps|; at least four are required, and the extrapolation
    tail uses the last four. x0 is the concentration point (the center
    here). Verdict booleans ask both extrapolation models to land within
    15 percent of the law under a single sign convention.
    """
    n, R = domain.n, domain.radius
    if consts is None:
        consts = balance_constants(n)
    if consts.n != n:
        raise ValueError("constants and domain dimensions do not match")
    if len(sweep) < 4:
        raise ValueError("a verdict needs at least four sweep points")
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    if np.linalg.norm(x0 - domain.center) > 1e-6 * R:
        raise ValueError("x0 must be the centered concentration point")

    entries = []
    last = None
    for eps_raw, dec, peak in sweep:
        eps = abs(float(eps_raw))
        if last is not None and not eps < last:
            raise ValueError("sweep offsets must be strictly decreasing")
        last = eps
        if not peak > 0:
            raise ValueError("peak values must be positive")
        dom = dec.domain
        if (dom.n != n or dom.radius != R
                or not np.array_equal(dom.center, domain.center)):
            raise ValueError("every decomposition must share the domain")
        if not dec.lam > 0:
            raise ValueError("decomposition scales must be positive")
        entries.append(BlowupEntry(
            eps=eps,
            peak=float(peak),
            alpha=float(dec.alpha),
            scale=float(dec.lam),
            eps_peak_sq=eps * float(peak) ** 2,
            eps_scale_pow=eps * float(dec.lam) ** (n - 4.0),
            peak_pow=float(peak) ** eps,
            peak_scale_ratio=float(peak) / (
                consts.c0 * float(dec.lam) ** ((n - 4.0) / 2.0)),
        ))

    tail = entries[-4:]
    eps_tail = np.array([e.eps for e in tail])
    glin = eps_tail
    glog = eps_tail * np.log(1.0 / eps_tail)
    peak_tail = np.array([e.eps_peak_sq for e in tail])
    scale_tail = np.array([e.eps_scale_pow for e in tail])
    peak_limits = (_affine_limit(glin, peak_tail),
                   _affine_limit(glog, peak_tail))
    scale_limits = (_affine_limit(glin, scale_tail),
                    _affine_limit(glog, scale_tail))

    phi0 = robin(domain, x0).phi
    targets = {}
    for name, c2v in (("half", consts.c2), ("full", consts.c2_variant_full)):
        t_scale = consts.c1 / c2v * phi0
        targets[name] = (consts.c0 ** 2 * t_scale, t_scale)

    def _ok(name):
        t_peak, t_scale = targets[name]
        checks = [abs(v / t_peak - 1.0) <= 0.15 for v in peak_limits]
        checks += [abs(v / t_scale - 1.0) <= 0.15 for v in scale_limits]
        return all(checks)

    convention = "half" if _ok("half") else ("full" if _ok("full") else "half")
    t_peak, t_scale = targets[convention]
    t_peak_alt, t_scale_alt = targets["full" if convention == "half"
                                      else "half"]
    peak_ok = all(abs(v / t_peak - 1.0) <= 0.15 for v in peak_limits)
    scale_ok = all(abs(v / t_scale - 1.0) <= 0.15 for v in scale_limits)
    return BlowupVerdict(
        n=n,
        entries=tuple(entries),
        tail=4,
        peak_limit_eps=peak_limits[0],
        peak_limit_epslog=peak_limits[1],
        scale_limit_eps=scale_limits[0],
        scale_limit_epslog=scale_limits[1],
        peak_target=t_peak,
        scale_target=t_scale,
        peak_target_alt=t_peak_alt,
        scale_target_alt=t_scale_alt,
        convention=convention,
        peak_ok=peak_ok,
        scale_ok=scale_ok,
        verdict=peak_ok and scale_ok,
    )


# ---------------------------------------------------------------------------
# supercritical obstruction

@dataclass(frozen=True)
class ObstructionEntry:
    """Obstruction scan result at one exponent offset."""

    eps: float
    scan_min: float
    floor: float
    margin: float
    positive: bool
    subcritical_root: float
    subcritical_root_closed: float
    sign_change: bool


@dataclass(frozen=True)
class ObstructionReport:
    """Scan of the supercritical balance over scales and stations.

    On the supercritical side the two balance terms share a sign, so the
    scanned combination stays bounded away from zero by at least the
    exponent-offset floor; the matched subcritical combination changes
    sign and its root is recorded for contrast. boundary_growth is the
    fitted blow-up rate of the domain term toward the boundary.
    """

    n: int
    radius: float
    lam_lo: float
    lam_hi: float
    stations: int
    lam_samples: int
    entries: tuple
    boundary_growth: SlopeFit
    all_positive: bool

    def __post_init__(self):
        if not self.entries:
            raise ValueError("report needs at least one entry")
        if not (0 < self.lam_lo < self.lam_hi):
            raise ValueError("scan bounds must be ordered and positive")

    def to_json(self, path):
        payload = {
            "n": self.n,
            "radius": self.radius,
            "lam_lo": self.lam_lo,
            "lam_hi": self.lam_hi,
            "stations": self.stations,
            "lam_samples": self.lam_samples,
            "boundary_growth_slope": self.boundary_growth.slope,
            "boundary_growth_rms": self.boundary_growth.rms_residual,
            "all_positive": self.all_positive,
            "entries": [
                {
                    "eps": e.eps,
                    "scan_min": e.scan_min,
                    "floor": e.floor,
                    "margin": e.margin,
                    "positive": e.positive,
                    "subcritical_root": e.subcritical_root,
                    "subcritical_root_closed": e.subcritical_root_closed,
                    "sign_change": e.sign_change,
                }
                for e in self.entries
            ],
        }
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=1)
            fh.write("\n")

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["eps", "scan_min", "floor", "margin", "subcritical_root"])
            for e in self.entries:
                writer.writerow([repr(float(v)) for v in (
                    e.eps, e.scan_min, e.floor, e.margin,
                    e.subcritical_root)])


def supercritical_obstruction(eps_list, domain, consts=None,
                              lam_bounds=(5.0, 1e4), stations=10,
                              lam_samples=25):
    """Scan the supercritical balance for a sign obstruction.

    For each eps the combination c2 * eps + c1 * phi(a) / lam^(n-4) is
    scanned over a log grid of scales between lam_bounds and over
    stations along a diameter up to 0.9 radius; the minimum, its floor
    c2 * eps and the margin above the floor are recorded. The matched
    subcritical combination is scanned for its sign change and root.
    """
    n, R = domain.n, domain.radius
    if consts is None:
        consts = balance_constants(n)
    if consts.n != n:
        raise ValueError("constants and domain dimensions do not match")
    eps_arr = [float(e) for e in eps_list]
    if not eps_arr:
        raise ValueError("eps_list must not be empty")
    if any(not e > 0 for e in eps_arr):
        raise ValueError("every eps must be positive")
    lo, hi = float(lam_bounds[0]), float(lam_bounds[1])
    if not (0 < lo < hi):
        raise ValueError("scan bounds must be ordered and positive")
    if stations < 3:
        raise ValueError("at least three stations are required")
    if lam_samples < 5:
        raise ValueError("at least five scale samples are required")

    direction = np.zeros(n)
    direction[0] = 1.0
    fractions = np.linspace(0.0, 0.9, stations)
    phis = np.array([
        robin(domain, domain.center + f * R * direction).phi
        for f in fractions
    ])
    lams = np.logspace(math.log10(lo), math.log10(hi), lam_samples)
    domain_term = consts.c1 * phis[:, None] / lams[None, :] ** (n - 4.0)
    phi0 = phis[0]

    entries = []
    for eps in eps_arr:
        grid = consts.c2 * eps + domain_term
        scan_min = float(grid.min())
        floor = consts.c2 * eps
        sub = lambda lam: consts.c2 * eps - consts.c1 * phi0 / lam ** (n - 4.0)
        lo_val, hi_val = sub(lo), sub(hi)
        sign_change = bool(lo_val < 0 < hi_val)
        if sign_change:
            root = float(brentq(sub, lo, hi, xtol=1e-12, rtol=1e-14))
        else:
            root = float("nan")
        entries.append(ObstructionEntry(
            eps=eps,
            scan_min=scan_min,
            floor=floor,
            margin=scan_min - floor,
            positive=bool(scan_min > floor),
            subcritical_root=root,
            subcritical_root_closed=float(
                (consts.c1 * phi0 / (consts.c2 * eps)) ** (1.0 / (n - 4.0))),
            sign_change=sign_change,
        ))

    return ObstructionReport(
        n=n,
        radius=R,
        lam_lo=lo,
        lam_hi=hi,
        stations=stations,
        lam_samples=lam_samples,
        entries=tuple(entries),
        boundary_growth=boundary_blowup_fit(domain).phi,
        all_positive=all(e.positive for e in entries),
    )

"""Radial Newton continuation for the two-field Navier system.

The fourth order problem on a ball, Delta^2 u = u^q with u and Delta u
vanishing on the boundary, splits into the coupled second order system

    Delta u = w,    Delta w = u^q,    u(R) = w(R) = 0,

for radial profiles u(r), w(r). The exponent is q = p + eps with
p = (n+4)/(n-4); eps < 0 is the subcritical branch, eps > 0 the
supercritical one. This module discretizes the radial Laplacian in
conservative flux form on a graded grid, solves the system by damped
Newton, and continues solutions in eps with warm starts.

The flux discretization is chosen for its summation-by-parts structure:
the discrete Laplacian is self-adjoint in the cell-volume inner product
for vectors vanishing at r = R, so the discrete solution satisfies the
energy identity sum V w^2 = sum V u^{q+1} to Newton tolerance rather
than to truncation order. A non-conservative three-point stencil loses
that identity at the percent level once the profile concentrates.

Also here: the decomposition u = alpha * Pdelta_lambda + v of a computed
solution into its nearest projected bubble and a remainder, diagnostics
for the remainder norm along a sweep, and a supercritical probe that
looks for (and is expected not to find) a concentrating branch at
exponent p + eps.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.optimize import minimize_scalar
from scipy.sparse.linalg import spsolve

from .bubble import (
    c0,
    critical_exponent,
    radial_profile,
    radial_profile_laplacian,
    radial_scale_derivative_laplacian,
    sobolev_energy,
)
from .green_robin import BallDomain
from .numerics import RadialGrid, SlopeFit, fit_loglog, sphere_measure

_DEFAULT_NODES = 2048
_GRID_STRENGTH = 5.0
# Below this offset the default grid no longer resolves the core: the
# concentration scale passes 1/60 of the radius and the discrete maximum
# starts lagging the true one by more than a percent. A 4096-node grid
# buys one more halving.
_EPS_FLOOR = 0.005


class SolverDivergence(RuntimeError):
    """Newton failed; carries the last accepted iterate in .last."""

    def __init__(self, message, last=None):
        super().__init__(message)
        self.last = last


class ContinuationError(RuntimeError):
    """A sweep died partway; .partial holds the solutions obtained."""

    def __init__(self, message, partial=()):
        super().__init__(message)
        self.partial = list(partial)


# ---------------------------------------------------------------------------
# containers


@dataclass(frozen=True)
class BubbleGuess:
    """Initial iterate alpha * Pdelta_lam for the Newton solve."""

    lam: float
    amplitude: float = 1.0

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("concentration parameter must be positive")
        if not self.amplitude > 0:
            raise ValueError("amplitude must be positive")


@dataclass(frozen=True)
class RadialSolution:
    """A converged (or declared-as-is) iterate of the two-field system.

    eps is stored with its sign: negative offsets are subcritical.
    residual is the scaled max-norm backward error actually achieved and
    must not exceed the declared tolerance; M duplicates u[0] for
    serialization and sweep bookkeeping.
    """

    grid: RadialGrid
    u: np.ndarray
    w: np.ndarray
    eps: float
    M: float
    residual: float
    newton_iters: int
    tolerance: float = 1e-10

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float)
        w = np.asarray(self.w, dtype=float)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "w", w)
        N = len(self.grid)
        if u.shape != (N,) or w.shape != (N,):
            raise ValueError("field samples must match the grid")
        if not np.all(u[:-1] > 0):
            raise ValueError("u must be positive away from the boundary")
        scale = float(np.max(np.abs(u)))
        if abs(u[-1]) > 1e-9 * scale or abs(w[-1]) > 1e-9 * max(
            float(np.max(np.abs(w))), 1e-300
        ):
            raise ValueError("u and w must vanish at r = R")
        if self.M != u[0]:
            raise ValueError("M must equal the center value u(0)")
        if not self.residual <= self.tolerance:
            raise ValueError("residual exceeds the declared tolerance")
        # u'(0) = w'(0) = 0 is not checked pointwise; the origin row of
        # the discrete Laplacian encodes the even reflection, so it holds
        # by construction for anything the solver returns.

    # -- integrals in the cell-volume quadrature the solver itself uses

    def _weights(self):
        return _cell_weights(self.grid)

    def energy_norm_sq(self):
        """Discrete int |Delta u|^2 over the ball."""
        return float(np.sum(self._weights() * self.w**2))

    def nonlinear_mass(self):
        """Discrete int u^{q+1} with q = p + eps."""
        q = critical_exponent(self.grid.n) + self.eps
        return float(np.sum(self._weights() * np.abs(self.u) ** (q + 1)))

    def sobolev_quotient(self):
        """||u||^2 / |u|^2_{q+1}, the quantity that should approach the
        best constant S along a subcritical sweep."""
        q = critical_exponent(self.grid.n) + self.eps
        return self.energy_norm_sq() / self.nonlinear_mass() ** (2.0 / (q + 1))

    # -- serialization

    def to_csv(self, path):
        """Write columns r,u,w with full float round-trip precision."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["r", "u", "w"])
            for r, uu, ww in zip(self.grid.nodes, self.u, self.w):
                writer.writerow([repr(float(r)), repr(float(uu)), repr(float(ww))])

    def metadata(self):
        return {
            "eps": self.eps,
            "M": self.M,
            "residual": self.residual,
            "iterations": self.newton_iters,
            "tolerance": self.tolerance,
            "n": self.grid.n,
            "radius": self.grid.R,
            "nodes": len(self.grid),
        }

    def to_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.metadata(), fh, indent=1)
            fh.write("\n")


def read_solution(csv_path, json_path):
    """Rebuild a RadialSolution from to_csv/to_json output."""
    with open(json_path) as fh:
        meta = json.load(fh)
    rows = []
    with open(csv_path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["r", "u", "w"]:
            raise ValueError("expected columns r,u,w")
        for row in reader:
            rows.append([float(x) for x in row])
    data = np.asarray(rows, dtype=float)
    grid = RadialGrid(int(meta["n"]), data[:, 0], float(meta["radius"]))
    return RadialSolution(
        grid=grid,
        u=data[:, 1],
        w=data[:, 2],
        eps=float(meta["eps"]),
        M=float(meta["M"]),
        residual=float(meta["residual"]),
        newton_iters=int(meta["iterations"]),
        tolerance=float(meta["tolerance"]),
    )


@dataclass(frozen=True)
class Decomposition:
    """Best fit u = alpha * Pdelta_{a,lam} + v for a radial solution.

    The point a is pinned to the center of the ball (the solutions are
    radial), so the minimization runs over (alpha, lam) only. v_norm is
    measured in the sqrt(int |Delta . |^2) norm. ortho_residuals holds
    the three orthogonality defects of v against the tangent directions
    of the bubble family, each normalized by ||v|| times the norm of the
    direction: (amplitude direction Pdelta, scale direction
    lam * d/dlam Pdelta, translation direction d/da Pdelta). The
    translation entry is exactly zero by parity: v is radial and the
    translation derivative is odd about the center.
    """

    alpha: float
    a: np.ndarray
    lam: float
    v_norm: float
    ortho_residuals: tuple
    domain: BallDomain
    eps: float

    def __post_init__(self):
        object.__setattr__(self, "a", np.asarray(self.a, dtype=float))
        if not self.alpha > 0:
            raise ValueError("amplitude alpha must be positive")
        if not self.lam > 0:
            raise ValueError("concentration lam must be positive")
        if self.v_norm < 0:
            raise ValueError("v_norm cannot be negative")
        for r in self.ortho_residuals:
            if abs(r) > 1e-8:
                raise ValueError(
                    "orthogonality defect %.3e exceeds 1e-8 of ||v|| "
                    "times the direction norm" % r
                )


@dataclass(frozen=True)
class VnormDiagnostics:
    """Fits of the remainder norm along a subcritical sweep.

    eps_fit: log ||v|| against log eps (slope near 1 expected on the
    ball, where the boundary distance stays of order one).
    lambda_fit / eps_lambda_fit: both quantities against lambda; in
    dimension 6 the remainder bound and the offset itself scale like
    lambda^{-2}, so the two slopes should straddle -2.
    bound_ratio is max ||v|| / (eps + (lam d)^{4-n}) over the sweep and
    ratios are the per-entry values behind the max.
    """

    eps_fit: SlopeFit
    lambda_fit: SlopeFit
    eps_lambda_fit: SlopeFit
    bound_ratio: float
    ratios: tuple


@dataclass(frozen=True)
class ProbeEntry:
    """Outcome of one supercritical continuation attempt.

    Fields from the decomposition of the final iterate (converged or
    not) are nan when the decomposition itself was not admissible. The
    concentrating flag is the conjunction the nonexistence theory rules
    out: a converged solution with small remainder, amplitude near one,
    and lam * dist(center, boundary) > 20.
    """

    eps: float
    converged: bool
    newton_iters: int
    residual: float
    M: float
    M_pow_eps: float
    alpha: float
    lam: float
    v_norm: float
    v_rel: float
    lambda_d: float
    concentrating: bool
    failure: str | None


@dataclass(frozen=True)
class SupercriticalProbe:
    entries: tuple
    any_concentrating: bool


# ---------------------------------------------------------------------------
# conservative discretization


def _fv_geometry(grid):
    """Face positions, face areas, and cell volumes in the r^{n-1} dr
    measure. Faces sit midway between nodes; the first cell is the ball
    of radius f_0 around the origin."""
    r = grid.nodes
    n = grid.n
    faces = 0.5 * (r[:-1] + r[1:])
    h = np.diff(r)
    area = faces ** (n - 1)
    vol = np.empty(r.size)
    vol[0] = faces[0] ** n / n
    vol[1:-1] = (faces[1:] ** n - faces[:-1] ** n) / n
    vol[-1] = (grid.R**n - faces[-1] ** n) / n
    return faces, h, area, vol


def _flux_laplacian(grid):
    """Sparse radial Laplacian in conservative form.

    Row i is (F_i - F_{i-1}) / V_i with fluxes F_i = area_i * (u_{i+1} -
    u_i) / h_i, which makes diag(V) @ L symmetric on zero-boundary
    vectors. The last row is left empty; the boundary condition is
    imposed separately.
    """
    N = len(grid)
    _, h, area, vol = _fv_geometry(grid)
    g = area / h
    rows = [0, 0]
    cols = [0, 1]
    vals = [-g[0] / vol[0], g[0] / vol[0]]
    for i in range(1, N - 1):
        rows += [i, i, i]
        cols += [i - 1, i, i + 1]
        vals += [g[i - 1] / vol[i], -(g[i - 1] + g[i]) / vol[i], g[i] / vol[i]]
    return sparse.csr_matrix((vals, (rows, cols)), shape=(N, N)), vol


def _cell_weights(grid):
    """Quadrature weights V_i * |S^{n-1}| matching the discretization;
    the boundary cell gets weight zero because both fields vanish there."""
    _, _, _, vol = _fv_geometry(grid)
    wts = vol * sphere_measure(grid.n)
    wts[-1] = 0.0
    return wts


class _Discretization:
    """Matrix, equilibration scales and residual for one grid."""

    def __init__(self, grid):
        self.grid = grid
        self.L, self.vol = _flux_laplacian(grid)
        self.absL = abs(self.L)
        mask = np.ones(len(grid))
        mask[-1] = 0.0
        self.mask = mask
        e_last = np.zeros(len(grid))
        e_last[-1] = 1.0
        self.L_bc = self.L + sparse.diags(e_last)

    def residual(self, u, w, q):
        Fu = self.L @ u - self.mask * w
        Fu[-1] = u[-1]
        Fw = self.L @ w - self.mask * np.abs(u) ** q
        Fw[-1] = w[-1]
        return Fu, Fw

    def scales(self, u, w, q):
        """Row equilibration: the natural size of each residual row."""
        su = self.absL @ np.abs(u) + np.abs(w)
        sw = self.absL @ np.abs(w) + np.abs(u) ** q
        su[-1] = 1.0 + abs(u[-1])
        sw[-1] = 1.0 + abs(w[-1])
        return su, sw


def _newton(disc, q, u, w, tol, max_iter):
    """Damped Newton on the scaled two-field residual.

    Returns (u, w, iterations, scaled residual, converged). The line
    search demands interior positivity of u and a fixed-scale Armijo
    decrease; there is no projection, so a step that cannot keep u
    positive while decreasing the residual fails the solve honestly.
    """
    N = len(disc.grid)
    u = np.array(u, dtype=float)
    w = np.array(w, dtype=float)
    for it in range(max_iter):
        Fu, Fw = disc.residual(u, w, q)
        su, sw = disc.scales(u, w, q)
        res = max(np.abs(Fu / su).max(), np.abs(Fw / sw).max())
        if res < tol:
            return u, w, it, res, True
        dfdu = disc.mask * (q * np.abs(u) ** (q - 1))
        cu = max(np.abs(u).max(), 1e-30)
        cw = max(np.abs(w).max(), 1e-30)
        Du = sparse.diags(1.0 / su)
        Dw = sparse.diags(1.0 / sw)
        J = sparse.bmat(
            [
                [Du @ (disc.L_bc * cu), Du @ sparse.diags(-disc.mask * cw)],
                [Dw @ sparse.diags(-dfdu * cu), Dw @ (disc.L_bc * cw)],
            ],
            format="csc",
        )
        y = spsolve(J, -np.concatenate([Fu / su, Fw / sw]))
        du = cu * y[:N]
        dw = cw * y[N:]
        m0 = np.sum((Fu / su) ** 2) + np.sum((Fw / sw) ** 2)
        t = 1.0
        accepted = False
        for _ in range(60):
            ut = u + t * du
            wt = w + t * dw
            if ut[:-1].min() > 0:
                Fu2, Fw2 = disc.residual(ut, wt, q)
                m2 = np.sum((Fu2 / su) ** 2) + np.sum((Fw2 / sw) ** 2)
                if m2 < (1.0 - 1e-4 * t) * m0:
                    accepted = True
                    break
            t /= 2
        if not accepted:
            return u, w, it, res, False
        u, w = ut, wt
    Fu, Fw = disc.residual(u, w, q)
    su, sw = disc.scales(u, w, q)
    res = max(np.abs(Fu / su).max(), np.abs(Fw / sw).max())
    return u, w, max_iter, res, res < tol


# ---------------------------------------------------------------------------
# projected bubble profiles (center bubble, closed forms)


def _projected_profile(n, lam, r, R):
    """Pdelta for a center bubble: delta minus its Navier harmonic
    extension, which for the ball is the exact quadratic
    delta(R) + Delta delta(R) (r^2 - R^2) / (2n)."""
    corr = radial_profile(n, lam, R) + radial_profile_laplacian(n, lam, R) * (
        r**2 - R**2
    ) / (2.0 * n)
    return radial_profile(n, lam, r) - corr


def _projected_profile_laplacian(n, lam, r, R):
    return radial_profile_laplacian(n, lam, r) - radial_profile_laplacian(n, lam, R)


def _projected_scale_derivative_laplacian(n, lam, r, R):
    """Laplacian of lam * d/dlam Pdelta, again a closed form."""
    return radial_scale_derivative_laplacian(
        n, lam, r
    ) - radial_scale_derivative_laplacian(n, lam, R)


def _bubble_fields(grid, lam, amplitude=1.0):
    r = grid.nodes
    u = amplitude * _projected_profile(grid.n, lam, r, grid.R)
    w = amplitude * _projected_profile_laplacian(grid.n, lam, r, grid.R)
    u[-1] = 0.0
    w[-1] = 0.0
    return u, w


def default_grid(domain, nodes=_DEFAULT_NODES):
    """The solver's standard sinh-graded grid on [0, R]."""
    return RadialGrid.sinh_graded(domain.n, nodes, R=domain.radius,
                                  strength=_GRID_STRENGTH)


def _cold_lambda(eps_mag, R):
    """Seed concentration for a cold start, calibrated on the n = 6
    blow-up law eps * lam^2 -> 20. For other dimensions this is only a
    starting point and the damping has to carry more of the work."""
    return math.sqrt(20.0 / eps_mag) / R


# ---------------------------------------------------------------------------
# public solves


def _check_eps_floor(eps_mag, grid):
    if eps_mag < _EPS_FLOOR - 1e-15 and len(grid) < 2 * _DEFAULT_NODES:
        raise ValueError(
            "offset %g is below the resolution floor %g of a %d-node grid; "
            "supply a grid with at least %d nodes"
            % (eps_mag, _EPS_FLOOR, len(grid), 2 * _DEFAULT_NODES)
        )
    if eps_mag < _EPS_FLOOR / 2.5:
        raise ValueError("offset %g is below any supported resolution" % eps_mag)


def solve_radial(eps, domain, init, grid=None, tol=1e-10, max_iter=30):
    """Solve the two-field system at signed offset eps on a ball.

    init may be a BubbleGuess (fields built from the projected bubble),
    a RadialSolution (its fields are reused, interpolated if the grid
    differs), or a pair of sample arrays matching the grid. The Newton
    iteration targets a scaled residual of tol/10 and the returned
    solution declares tol, so round-off level drift cannot invalidate
    the object later.

    Raises SolverDivergence when damping stalls or the iterates collapse
    onto the zero branch; the exception carries the last positive
    iterate, which is what the supercritical probe inspects.
    """
    n = domain.n
    p = critical_exponent(n)
    if not abs(eps) < p - 1:
        raise ValueError("offset magnitude must stay below p - 1 = %g" % (p - 1))
    if grid is None:
        grid = init.grid if isinstance(init, RadialSolution) else default_grid(domain)
    if grid.n != n or grid.R != domain.radius:
        raise ValueError("grid dimension or radius does not match the domain")
    _check_eps_floor(abs(eps), grid)

    if isinstance(init, BubbleGuess):
        u0, w0 = _bubble_fields(grid, init.lam, init.amplitude)
    elif isinstance(init, RadialSolution):
        if init.grid is grid or np.array_equal(init.grid.nodes, grid.nodes):
            u0, w0 = init.u.copy(), init.w.copy()
        else:
            u0 = np.interp(grid.nodes, init.grid.nodes, init.u)
            w0 = np.interp(grid.nodes, init.grid.nodes, init.w)
            u0[-1] = 0.0
            w0[-1] = 0.0
    else:
        u0, w0 = (np.array(f, dtype=float) for f in init)
        if u0.shape != (len(grid),) or w0.shape != (len(grid),):
            raise ValueError("init samples must match the grid")
    if not np.all(u0[:-1] > 0):
        raise ValueError("initial iterate must be positive in the interior")

    disc = _Discretization(grid)
    q = p + eps
    u, w, iters, res, ok = _newton(disc, q, u0, w0, tol / 10.0, max_iter)
    m0 = float(np.max(np.abs(u0)))
    collapsed = float(np.max(np.abs(u))) < 1e-6 * m0
    if not ok or collapsed:
        u[-1] = 0.0
        w[-1] = 0.0
        last = RadialSolution(
            grid=grid, u=u, w=w, eps=eps, M=float(u[0]), residual=float(res),
            newton_iters=iters, tolerance=max(float(res), tol),
        )
        reason = (
            "iterates collapsed onto the trivial zero branch"
            if collapsed
            else "Newton damping stalled at scaled residual %.2e after %d "
            "iterations" % (res, iters)
        )
        raise SolverDivergence(reason, last=last)
    u[-1] = 0.0
    w[-1] = 0.0
    return RadialSolution(
        grid=grid, u=u, w=w, eps=eps, M=float(u[0]), residual=float(res),
        newton_iters=iters, tolerance=tol,
    )


def continuation_sweep(eps_list, domain, grid=None, tol=1e-10):
    """Subcritical continuation: solve at each positive offset in
    eps_list (strictly decreasing, first entry at least 0.3) and warm
    start each solve from the previous solution.

    Two warm starts are tried per step: the previous fields rebuilt as a
    bubble guess with the concentration advanced by the blow-up law, and
    the raw previous fields. If both fail the step is split at the
    geometric midpoint and retried, recursively. The first offset that
    cannot be reached aborts the sweep; the exception carries the
    solutions already obtained.
    """
    eps_arr = [float(e) for e in eps_list]
    if len(eps_arr) < 1:
        raise ValueError("eps_list must be nonempty")
    if any(e <= 0 for e in eps_arr):
        raise ValueError("subcritical sweep offsets must be positive")
    if any(b >= a for a, b in zip(eps_arr, eps_arr[1:])):
        raise ValueError("eps_list must decrease strictly")
    if eps_arr[0] < 0.3:
        raise ValueError(
            "first offset must sit in the easy regime (at least 0.3); "
            "cold starts closer to critical are not reliable"
        )
    if grid is None:
        grid = default_grid(domain)
    _check_eps_floor(min(eps_arr), grid)

    n = domain.n
    p = critical_exponent(n)
    out = []
    e0 = eps_arr[0]
    try:
        sol = solve_radial(-e0, domain, BubbleGuess(lam=_cold_lambda(e0, domain.radius)),
                           grid=grid, tol=tol)
    except SolverDivergence as exc:
        raise ContinuationError(
            "cold start at offset %g failed: %s" % (e0, exc), partial=[]
        ) from exc
    out.append(sol)

    def advance(prev, e_prev, e_tgt, depth):
        lam_prev = c0(n) ** (2.0 / (4 - n)) * prev.M ** ((p - 1 - e_prev) / 4.0)
        lam_g = lam_prev * math.sqrt(e_prev / e_tgt)
        ug, wg = _bubble_fields(grid, lam_g)
        amp = prev.M * math.sqrt(e_prev / e_tgt) / ug[0]
        candidates = [(amp * ug, amp * wg), prev]
        for cand in candidates:
            try:
                return solve_radial(-e_tgt, domain, cand, grid=grid, tol=tol)
            except SolverDivergence:
                continue
        if depth >= 12:
            raise SolverDivergence(
                "continuation bisection exhausted at offset %g" % e_tgt
            )
        mid = math.sqrt(e_prev * e_tgt)
        half = advance(prev, e_prev, mid, depth + 1)
        return advance(half, mid, e_tgt, depth + 1)

    for e_tgt in eps_arr[1:]:
        try:
            sol = advance(sol, abs(out[-1].eps), e_tgt, 0)
        except SolverDivergence as exc:
            raise ContinuationError(
                "sweep aborted at offset %g: %s" % (e_tgt, exc), partial=out
            ) from exc
        out.append(sol)
    return out


# ---------------------------------------------------------------------------
# decomposition


def decompose(sol, domain):
    """Split a solution as alpha * Pdelta_lam + v with the bubble at the
    center, minimizing the energy norm of v over (alpha, lam).

    alpha is eliminated in closed form at each lam (the problem is
    linear in alpha), lam is located by a bracketed scan of the profile
    objective in log lam followed by Brent and a secant polish of the
    exact stationarity condition. The polish is what pushes the scale
    orthogonality defect from the Brent tolerance (around 1e-8) down to
    rounding; without it the defect fails the contract at fat offsets,
    where the objective is shallow.
    """
    if not isinstance(sol, RadialSolution):
        raise TypeError("decompose expects a RadialSolution")
    n = domain.n
    if sol.grid.n != n or sol.grid.R != domain.radius:
        raise ValueError("solution grid does not match the domain")
    energy = sol.energy_norm_sq()
    target = sobolev_energy(n)
    if not (0.5 * target <= energy <= 2.0 * target):
        raise ValueError(
            "energy %.4g is not within a factor 2 of the bubble energy %.4g; "
            "the bubble-plus-remainder ansatz does not apply" % (energy, target)
        )

    grid = sol.grid
    r = grid.nodes
    R = grid.R
    wts = _cell_weights(grid)
    w = sol.w

    def lap_pd(lam):
        return _projected_profile_laplacian(n, lam, r, R)

    def alpha_at(lam):
        lp = lap_pd(lam)
        return float(np.sum(wts * w * lp) / np.sum(wts * lp * lp))

    def objective(loglam):
        lam = math.exp(loglam)
        al = alpha_at(lam)
        lp = lap_pd(lam)
        return float(np.sum(wts * (w - al * lp) ** 2))

    lam_seed = c0(n) ** (2.0 / (4 - n)) * sol.M ** (
        (critical_exponent(n) - 1 + sol.eps) / 4.0
    )
    scan = np.log(lam_seed) + np.linspace(-1.6, 1.6, 33)
    vals = [objective(x) for x in scan]
    k = int(np.argmin(vals))
    k = min(max(k, 1), len(scan) - 2)
    bracket = (scan[k - 1], scan[k], scan[k + 1])
    try:
        opt = minimize_scalar(objective, bracket=bracket, method="brent",
                              options={"xtol": 1e-12})
    except ValueError as exc:
        raise RuntimeError("profile minimization failed to bracket") from exc

    def stationarity(loglam):
        # d/d(log lam) of the objective, up to the factor -2 alpha:
        # the inner product of the remainder with the scale direction.
        lam = math.exp(loglam)
        al = alpha_at(lam)
        lp = lap_pd(lam)
        ds = _projected_scale_derivative_laplacian(n, lam, r, R)
        return float(np.sum(wts * (w - al * lp) * ds))

    x1 = float(opt.x)
    x0 = x1 * (1 + 1e-7) + 1e-12
    g1 = stationarity(x1)
    g0 = stationarity(x0)
    for _ in range(8):
        if g1 == g0 or abs(g1) < 1e-300:
            break
        x2 = x1 - g1 * (x1 - x0) / (g1 - g0)
        x0, g0 = x1, g1
        x1 = x2
        g1 = stationarity(x1)

    lam = math.exp(x1)
    alpha = alpha_at(lam)
    if not alpha > 0:
        raise RuntimeError("minimization returned a nonpositive amplitude")
    lp = lap_pd(lam)
    v = w - alpha * lp
    v_norm = float(np.sqrt(np.sum(wts * v * v)))
    ds = _projected_scale_derivative_laplacian(n, lam, r, R)
    pn = float(np.sqrt(np.sum(wts * lp * lp)))
    dn = float(np.sqrt(np.sum(wts * ds * ds)))
    floor = max(v_norm, 1e-14 * float(np.sqrt(energy)))
    amp_defect = float(np.sum(wts * v * lp)) / (floor * pn)
    scale_defect = float(np.sum(wts * v * ds)) / (floor * dn)

    # curvature of the objective in log lam; a flat or concave profile
    # means the (alpha, lam) Hessian is degenerate and the minimizer
    # meaningless, so that is reported rather than returned
    h = 1e-3
    f0 = objective(x1)
    curv = (objective(x1 + h) - 2 * f0 + objective(x1 - h)) / h**2
    if not curv > 0:
        raise RuntimeError(
            "objective curvature %.3e at the minimizer; the decomposition "
            "is degenerate" % curv
        )

    return Decomposition(
        alpha=alpha,
        a=np.array(domain.center, dtype=float),
        lam=lam,
        v_norm=v_norm,
        ortho_residuals=(amp_defect, scale_defect, 0.0),
        domain=domain,
        eps=sol.eps,
    )


# ---------------------------------------------------------------------------
# sweep diagnostics


def vnorm_diagnostics(sweep, eps_list):
    """Slope fits and the uniform bound ratio for remainder norms along
    a subcritical sweep of at least five decompositions."""
    decomps = list(sweep)
    eps_arr = np.asarray([abs(float(e)) for e in eps_list], dtype=float)
    if len(decomps) != eps_arr.size:
        raise ValueError("one offset per decomposition required")
    if len(decomps) < 5:
        raise ValueError("need at least 5 sweep entries to fit")
    vnorms = np.array([d.v_norm for d in decomps])
    if np.any(vnorms <= 0):
        raise ValueError("remainder norms must be positive for log fits")
    lams = np.array([d.lam for d in decomps])
    n = decomps[0].domain.n
    dists = np.array(
        [
            d.domain.radius - float(np.linalg.norm(d.a - d.domain.center))
            for d in decomps
        ]
    )
    bound = eps_arr + (lams * dists) ** (4 - n)
    ratios = vnorms / bound
    return VnormDiagnostics(
        eps_fit=fit_loglog(eps_arr, vnorms),
        lambda_fit=fit_loglog(lams, vnorms),
        eps_lambda_fit=fit_loglog(lams, eps_arr),
        bound_ratio=float(ratios.max()),
        ratios=tuple(float(x) for x in ratios),
    )


def supercritical_probe(eps_list, domain, grid=None, tol=1e-10):
    """Attempt supercritical continuation at exponent p + eps from a
    concentrated bubble guess, for each positive eps in eps_list.

    Per-offset failures are recorded, not raised: the expected outcome
    on a ball is that no attempt converges to a concentrating solution,
    which is numerical evidence for (not a proof of) nonexistence. The
    final iterate of each attempt is decomposed when admissible so the
    report can show how close the stalled branch came to the forbidden
    regime.
    """
    eps_arr = [float(e) for e in eps_list]
    if any(e <= 0 for e in eps_arr):
        raise ValueError("probe offsets must be positive")
    if grid is None:
        grid = default_grid(domain)
    entries = []
    for eps in eps_arr:
        guess = BubbleGuess(lam=_cold_lambda(eps, domain.radius))
        failure = None
        try:
            sol = solve_radial(+eps, domain, guess, grid=grid, tol=tol,
                               max_iter=40)
            converged = True
        except SolverDivergence as exc:
            sol = exc.last
            converged = False
            failure = str(exc)
        alpha = lam = v_norm = v_rel = lambda_d = math.nan
        if sol is not None:
            try:
                dec = decompose(sol, domain)
                alpha = dec.alpha
                lam = dec.lam
                v_norm = dec.v_norm
                v_rel = dec.v_norm / math.sqrt(sol.energy_norm_sq())
                lambda_d = dec.lam * (
                    domain.radius
                    - float(np.linalg.norm(dec.a - domain.center))
                )
            except (ValueError, RuntimeError) as exc:
                if failure is None:
                    failure = "decomposition inadmissible: %s" % exc
        concentrating = bool(
            converged
            and v_norm < 0.1
            and abs(alpha - 1.0) < 0.1
            and lambda_d > 20.0
        )
        entries.append(
            ProbeEntry(
                eps=eps,
                converged=converged,
                newton_iters=sol.newton_iters if sol is not None else 0,
                residual=sol.residual if sol is not None else math.nan,
                M=sol.M if sol is not None else math.nan,
                M_pow_eps=sol.M**eps if sol is not None else math.nan,
                alpha=alpha,
                lam=lam,
                v_norm=v_norm,
                v_rel=v_rel,
                lambda_d=lambda_d,
                concentrating=concentrating,
                failure=failure,
            )
        )
    return SupercriticalProbe(
        entries=tuple(entries),
        any_concentrating=any(e.concentrating for e in entries),
    )

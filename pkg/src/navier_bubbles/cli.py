"""Command line front end for the package.

Five subcommands drive the library end to end:

  constants         closed-form constant table for a dimension
  robin             potential profile along a diameter plus boundary fits
  verify-blowup     continuation sweep, decomposition, blow-up verdict
  supercritical     obstruction certificate, probe, subcritical contrast
  expansion-orders  fitted decay exponents of the projection deficit

Output contract. Every run is deterministic given its configuration:
reruns write byte-identical artifacts (no timestamps, no environment
echoes, floats serialized by repr). Every numeric in an output table
carries a provenance tag, one of

  formula     closed form evaluated directly
  quadrature  numerical integral of known fields
  solver      output of an iterative solve (Newton, BVP, root finding,
              finite differences of solved fields)
  fit         least-squares fit over other outputs

JSON artifacts are pretty printed and carry a ``schema`` string; CSV
artifacts are RFC 4180 (CRLF rows, UTF-8) and pair every numeric column
with a ``<name>_provenance`` column. Column meanings are documented in
the repository README. When a pipeline stage fails, everything computed
before the failure is still written, along with a ``failure.json``
naming the stage.

Exit codes: 0 all checks passed, 1 a check failed, 2 usage or
configuration error, 3 a pipeline stage failed partway.

Dimension policy: the constant table and the potential profile are
closed-form surfaces and accept any n >= 5. The sweep-based commands
are calibrated on n = 6; ``supercritical`` additionally accepts n = 5.
The seed is recorded in every configuration echo so that future
stochastic fallbacks stay reproducible; the current pipelines draw no
random numbers.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from .bubble import (BubbleParams, balance_constants, sobolev_constant,
                     sobolev_energy)
from .green_robin import BallDomain, boundary_blowup_fit, robin
from .projection import expansion_orders
from .reduction import blowup_verdict, supercritical_obstruction
from .solver import (ContinuationError, SolverDivergence, continuation_sweep,
                     decompose, default_grid, supercritical_probe,
                     vnorm_diagnostics)

SCHEMA_PREFIX = "navier-bubbles"
SCHEMA_VERSION = 1

PROV_FORMULA = "formula"
PROV_QUADRATURE = "quadrature"
PROV_SOLVER = "solver"
PROV_FIT = "fit"

DEFAULT_SCHEDULE = (0.3, 0.2, 0.1, 0.05, 0.02, 0.01, 0.005)

# check tolerances mirrored by the acceptance tests
LAW_RTOL = 0.15          # extrapolated law vs closed-form limit
AMP_TOL = 0.05           # |alpha - 1| at the sharpest offset
RATIO_TOL = 0.10         # |peak/scale ratio - 1| at the sharpest offset
ENERGY_RTOL = 0.05       # final energies vs the critical level
VNORM_SLOPE_BAND = (0.5, 1.5)   # remainder decay exponent in eps
ORDER_SLOPE_TOL = 0.3    # deficit exponents vs their targets
CONTRAST_EPS_CAP = 0.02  # contrast solve runs at or below this offset
CONTRAST_V_REL = 0.1
CONTRAST_AMP_TOL = 0.1
CONTRAST_LAMBDA_D = 20.0


class CliError(ValueError):
    """Configuration or usage problem detected before any solve."""


def _schema(name):
    return "%s/%s/%d" % (SCHEMA_PREFIX, name, SCHEMA_VERSION)


# ---------------------------------------------------------------------------
# run configuration


@dataclass(frozen=True)
class RunConfig:
    """One run's full parameterization, round-trippable through JSON.

    eps_schedule holds positive offset magnitudes, strictly decreasing;
    the sweep solves at exponent p - eps for each entry. grid_nodes and
    quad_tol are handed to the radial solver. seed is recorded for
    reproducibility; nothing currently draws from it.
    """

    n: int = 6
    radius: float = 1.0
    eps_schedule: tuple = DEFAULT_SCHEDULE
    grid_nodes: int = 2048
    quad_tol: float = 1e-10
    out_dir: str = "runs"
    seed: int = 0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 5:
            raise CliError("dimension must be an integer at least 5")
        object.__setattr__(self, "n", int(self.n))
        if not (math.isfinite(self.radius) and self.radius > 0):
            raise CliError("radius must be positive and finite")
        object.__setattr__(self, "radius", float(self.radius))
        sched = tuple(float(e) for e in self.eps_schedule)
        if not sched:
            raise CliError("eps schedule must not be empty")
        if any(not (math.isfinite(e) and e > 0) for e in sched):
            raise CliError("eps schedule entries must be positive and "
                           "finite")
        if any(b >= a for a, b in zip(sched, sched[1:])):
            raise CliError("eps schedule must decrease strictly")
        object.__setattr__(self, "eps_schedule", sched)
        if int(self.grid_nodes) != self.grid_nodes or self.grid_nodes < 256:
            raise CliError("grid_nodes must be an integer at least 256")
        object.__setattr__(self, "grid_nodes", int(self.grid_nodes))
        if not (math.isfinite(self.quad_tol) and 0 < self.quad_tol < 1):
            raise CliError("quad_tol must lie strictly between 0 and 1")
        object.__setattr__(self, "quad_tol", float(self.quad_tol))
        if not isinstance(self.out_dir, str) or not self.out_dir:
            raise CliError("out_dir must be a nonempty path string")
        if int(self.seed) != self.seed or self.seed < 0:
            raise CliError("seed must be a nonnegative integer")
        object.__setattr__(self, "seed", int(self.seed))

    def to_dict(self):
        return {
            "schema": _schema("run-config"),
            "n": self.n,
            "radius": self.radius,
            "eps_schedule": list(self.eps_schedule),
            "grid_nodes": self.grid_nodes,
            "quad_tol": self.quad_tol,
            "out_dir": self.out_dir,
            "seed": self.seed,
        }

    def to_json(self, path):
        _write_json(path, self.to_dict())

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise CliError("run configuration must be a JSON object")
        schema = data.get("schema")
        if schema != _schema("run-config"):
            raise CliError("unrecognized run-config schema %r" % (schema,))
        fields = {"n", "radius", "eps_schedule", "grid_nodes", "quad_tol",
                  "out_dir", "seed"}
        extra = set(data) - fields - {"schema"}
        if extra:
            raise CliError("unknown run-config fields: %s"
                           % ", ".join(sorted(extra)))
        missing = fields - set(data)
        if missing:
            raise CliError("missing run-config fields: %s"
                           % ", ".join(sorted(missing)))
        return cls(n=data["n"], radius=data["radius"],
                   eps_schedule=tuple(data["eps_schedule"]),
                   grid_nodes=data["grid_nodes"], quad_tol=data["quad_tol"],
                   out_dir=data["out_dir"], seed=data["seed"])

    @classmethod
    def from_json(cls, path):
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as exc:
            raise CliError("cannot read config file: %s" % exc) from exc
        except json.JSONDecodeError as exc:
            raise CliError("config file is not valid JSON: %s"
                           % exc) from exc
        return cls.from_dict(data)

    def domain(self):
        return BallDomain(self.n, np.zeros(self.n), self.radius)


# ---------------------------------------------------------------------------
# serialization helpers


def _write_json(path, obj):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, indent=1)
        fh.write("\n")


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)


def _cell(value):
    """String form of one CSV cell; floats go through repr so the
    round trip is lossless and reruns are byte identical."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _pv(value, provenance):
    """A numeric with its provenance tag; non-finite values serialize
    as null so the JSON stays standard."""
    v = float(value)
    return {"value": v if math.isfinite(v) else None,
            "provenance": provenance}


def _check(name, observed, provenance, target, tolerance, passed):
    return {
        "name": name,
        "observed": _pv(observed, provenance),
        "target": target,
        "tolerance": tolerance,
        "passed": bool(passed),
    }


def _ensure_dir(path):
    os.makedirs(path, exist_ok=True)
    return path


# ---------------------------------------------------------------------------
# constants


def constants_rows(n):
    """The closed-form constant table as (label, value, provenance)
    rows. Everything here is a direct formula evaluation."""
    consts = balance_constants(n)
    phi0 = (2.0 * n - 4.0) / n  # center potential of the unit ball
    rows = [
        ("dimension", n, PROV_FORMULA),
        ("critical exponent p", consts.p, PROV_FORMULA),
        ("bubble amplitude c0", consts.c0, PROV_FORMULA),
        ("best quotient level S", sobolev_constant(n), PROV_FORMULA),
        ("free bubble energy S^(n/4)", sobolev_energy(n), PROV_FORMULA),
        ("interaction constant c1", consts.c1, PROV_FORMULA),
        ("exponent response c2, full variant", consts.c2_variant_full,
         PROV_FORMULA),
        ("exponent response c2, half variant", consts.c2_variant_half,
         PROV_FORMULA),
        ("variant ratio full/half", consts.c2_variant_full
         / consts.c2_variant_half, PROV_FORMULA),
        ("operative c2 (positive)", consts.c2, PROV_FORMULA),
        ("ratio c1/c2", consts.c1 / consts.c2, PROV_FORMULA),
        ("unit-ball center potential", phi0, PROV_FORMULA),
        ("scale law limit eps*lam^(n-4), unit ball",
         consts.c1 / consts.c2 * phi0, PROV_FORMULA),
        ("peak law limit eps*M^2, unit ball",
         consts.c0 ** 2 * consts.c1 / consts.c2 * phi0, PROV_FORMULA),
    ]
    return rows


def cmd_constants(n, out_dir=None, stream=None):
    stream = stream or sys.stdout
    if n < 5:
        raise CliError("dimension must be at least 5")
    rows = constants_rows(n)
    print("constant table for dimension n = %d" % n, file=stream)
    print("%-44s %-22s %s" % ("name", "value", "provenance"), file=stream)
    for label, value, prov in rows:
        if isinstance(value, int):
            text = str(value)
        else:
            text = "%.10g" % value
        print("%-44s %-22s %s" % (label, text, prov), file=stream)
    if out_dir is not None:
        _ensure_dir(out_dir)
        _write_csv(os.path.join(out_dir, "constants.csv"),
                   ["name", "value", "value_provenance"],
                   [[label, _cell(value), prov] for label, value, prov
                    in rows])
        print("wrote %s" % os.path.join(out_dir, "constants.csv"),
              file=stream)
    return 0


# ---------------------------------------------------------------------------
# robin profile


def cmd_robin(n, radius, stations, out_dir, stream=None):
    stream = stream or sys.stdout
    if n < 5:
        raise CliError("dimension must be at least 5")
    if not (math.isfinite(radius) and radius > 0):
        raise CliError("radius must be positive and finite")
    if stations < 5 or stations % 2 == 0:
        raise CliError("stations must be odd and at least 5 so the "
                       "center row exists")
    domain = BallDomain(n, np.zeros(n), radius)
    fractions = np.linspace(-0.9, 0.9, stations)
    axis = np.zeros(n)
    axis[0] = 1.0

    # the profile is even in the signed coordinate; evaluate each
    # magnitude once so mirrored stations agree to the last bit
    cache = {}
    rows = []
    for idx, frac in enumerate(fractions):
        key = round(abs(float(frac)), 15)
        if key not in cache:
            ev = robin(domain, domain.center + key * radius * axis)
            cache[key] = (float(ev.phi), float(np.linalg.norm(ev.grad)))
        phi, grad_norm = cache[key]
        rows.append([
            _cell(idx), PROV_FORMULA,
            _cell(float(frac) * radius), PROV_FORMULA,
            _cell(phi), PROV_SOLVER,
            _cell(grad_norm), PROV_SOLVER,
        ])

    _ensure_dir(out_dir)
    profile_path = os.path.join(out_dir, "robin_profile.csv")
    _write_csv(profile_path,
               ["station", "station_provenance",
                "axis_coordinate", "axis_coordinate_provenance",
                "phi", "phi_provenance",
                "grad_norm", "grad_norm_provenance"],
               rows)

    fits = boundary_blowup_fit(domain)
    center_phi, center_grad = cache[0.0]
    closed_center = (2.0 * n - 4.0) / n * radius ** (4.0 - n)
    report = {
        "schema": _schema("robin-profile"),
        "n": n,
        "radius": _pv(radius, PROV_FORMULA),
        "stations": stations,
        "center_phi": _pv(center_phi, PROV_SOLVER),
        "center_phi_closed_form": _pv(closed_center, PROV_FORMULA),
        "center_grad_norm": _pv(center_grad, PROV_SOLVER),
        "phi_boundary_exponent": {
            "value": fits.phi.slope,
            "expected": 4.0 - n,
            "rms_residual": fits.phi.rms_residual,
            "provenance": PROV_FIT,
        },
        "grad_boundary_exponent": {
            "value": fits.grad_norm.slope,
            "expected": 3.0 - n,
            "rms_residual": fits.grad_norm.rms_residual,
            "provenance": PROV_FIT,
        },
    }
    fits_path = os.path.join(out_dir, "robin_fits.json")
    _write_json(fits_path, report)

    print("wrote %s (%d stations)" % (profile_path, stations), file=stream)
    print("wrote %s" % fits_path, file=stream)
    print("center potential %.10g (closed form %.10g)"
          % (center_phi, closed_center), file=stream)
    print("boundary exponents: phi %.4f (expect %g), gradient %.4f "
          "(expect %g)" % (fits.phi.slope, 4.0 - n,
                           fits.grad_norm.slope, 3.0 - n), file=stream)
    return 0


# ---------------------------------------------------------------------------
# verify-blowup


def _sweep_rows(n, solutions, decomps, consts):
    rows = []
    for sol, dec in zip(solutions, decomps):
        eps = abs(float(sol.eps))
        lam = float(dec.lam)
        ratio = float(sol.M) / (consts.c0 * lam ** ((n - 4.0) / 2.0))
        rows.append([
            _cell(eps), PROV_FORMULA,
            _cell(float(sol.M)), PROV_SOLVER,
            _cell(float(dec.alpha)), PROV_SOLVER,
            _cell(lam), PROV_SOLVER,
            _cell(float(dec.v_norm)), PROV_SOLVER,
            _cell(eps * lam ** (n - 4.0)), PROV_SOLVER,
            _cell(eps * float(sol.M) ** 2), PROV_SOLVER,
            _cell(ratio), PROV_SOLVER,
            _cell(int(sol.newton_iters)), PROV_SOLVER,
            _cell(float(sol.residual)), PROV_SOLVER,
        ])
    return rows


_SWEEP_HEADER = [
    "eps", "eps_provenance",
    "peak", "peak_provenance",
    "alpha", "alpha_provenance",
    "lam", "lam_provenance",
    "v_norm", "v_norm_provenance",
    "eps_lam_pow", "eps_lam_pow_provenance",
    "eps_peak_sq", "eps_peak_sq_provenance",
    "peak_scale_ratio", "peak_scale_ratio_provenance",
    "newton_iters", "newton_iters_provenance",
    "residual", "residual_provenance",
]


def _persist_failure(out_dir, stage, error, completed):
    _write_json(os.path.join(out_dir, "failure.json"), {
        "schema": _schema("failure"),
        "stage": stage,
        "error": str(error),
        "completed": completed,
    })


def cmd_verify_blowup(config, out_dir, stream=None):
    stream = stream or sys.stdout
    if len(config.eps_schedule) < 4:
        raise CliError("the blow-up verdict extrapolates over a tail of "
                       "four offsets; give a schedule with at least four")
    if config.n != 6:
        raise CliError("the continuation sweep is calibrated for "
                       "dimension 6")
    _ensure_dir(out_dir)
    config.to_json(os.path.join(out_dir, "config.json"))

    domain = config.domain()
    consts = balance_constants(config.n)
    grid = default_grid(domain, config.grid_nodes)

    try:
        solutions = continuation_sweep(list(config.eps_schedule), domain,
                                       grid=grid, tol=config.quad_tol)
    except ContinuationError as exc:
        partial = list(exc.partial)
        decs = [decompose(s, domain) for s in partial]
        _write_csv(os.path.join(out_dir, "sweep.csv"), _SWEEP_HEADER,
                   _sweep_rows(config.n, partial, decs, consts))
        _persist_failure(out_dir, "sweep", exc, len(partial))
        print("sweep failed after %d offsets: %s" % (len(partial), exc),
              file=sys.stderr)
        return 3
    except (ValueError, SolverDivergence) as exc:
        _persist_failure(out_dir, "sweep", exc, 0)
        print("sweep failed before the first solve: %s" % exc,
              file=sys.stderr)
        return 3

    decomps = []
    try:
        for sol in solutions:
            decomps.append(decompose(sol, domain))
    except (ValueError, RuntimeError) as exc:
        done = len(decomps)
        _write_csv(os.path.join(out_dir, "sweep.csv"), _SWEEP_HEADER,
                   _sweep_rows(config.n, solutions[:done], decomps, consts))
        _persist_failure(out_dir, "decompose", exc, done)
        print("decomposition failed at offset index %d: %s" % (done, exc),
              file=sys.stderr)
        return 3

    _write_csv(os.path.join(out_dir, "sweep.csv"), _SWEEP_HEADER,
               _sweep_rows(config.n, solutions, decomps, consts))

    try:
        verdict = blowup_verdict(
            [(s.eps, d, s.M) for s, d in zip(solutions, decomps)],
            domain.center, domain, consts=consts)
    except ValueError as exc:
        _persist_failure(out_dir, "verdict", exc, len(decomps))
        print("verdict construction failed: %s" % exc, file=sys.stderr)
        return 3

    final_sol = solutions[-1]
    final_dec = decomps[-1]
    final = verdict.entries[-1]
    peaks = [float(s.M) for s in solutions]
    energy = final_sol.energy_norm_sq()
    mass = final_sol.nonlinear_mass()
    level = sobolev_energy(config.n)

    checks = [
        _check("peak_monotone_increasing",
               1.0 if all(b > a for a, b in zip(peaks, peaks[1:])) else 0.0,
               PROV_SOLVER, 1.0, 0.0,
               all(b > a for a, b in zip(peaks, peaks[1:]))),
        _check("final_amplitude_near_unity", final_dec.alpha, PROV_SOLVER,
               1.0, AMP_TOL, abs(final_dec.alpha - 1.0) <= AMP_TOL),
        _check("final_peak_scale_ratio", final.peak_scale_ratio,
               PROV_SOLVER, 1.0, RATIO_TOL,
               abs(final.peak_scale_ratio - 1.0) <= RATIO_TOL),
        _check("final_energy_at_critical_level", energy, PROV_QUADRATURE,
               level, ENERGY_RTOL, abs(energy / level - 1.0) <= ENERGY_RTOL),
        _check("final_mass_at_critical_level", mass, PROV_QUADRATURE,
               level, ENERGY_RTOL, abs(mass / level - 1.0) <= ENERGY_RTOL),
        _check("scale_law_limit_eps_model", verdict.scale_limit_eps,
               PROV_FIT, verdict.scale_target, LAW_RTOL, verdict.scale_ok),
        _check("scale_law_limit_epslog_model", verdict.scale_limit_epslog,
               PROV_FIT, verdict.scale_target, LAW_RTOL, verdict.scale_ok),
        _check("peak_law_limit_eps_model", verdict.peak_limit_eps,
               PROV_FIT, verdict.peak_target, LAW_RTOL, verdict.peak_ok),
        _check("peak_law_limit_epslog_model", verdict.peak_limit_epslog,
               PROV_FIT, verdict.peak_target, LAW_RTOL, verdict.peak_ok),
    ]

    remainder = {"fitted": False}
    if len(solutions) >= 5:
        diag = vnorm_diagnostics(decomps, [abs(s.eps) for s in solutions])
        lo, hi = VNORM_SLOPE_BAND
        checks.append(_check("remainder_decay_exponent",
                             diag.eps_fit.slope, PROV_FIT,
                             1.0, hi - 1.0,
                             lo <= diag.eps_fit.slope <= hi))
        remainder = {
            "fitted": True,
            "eps_exponent": _pv(diag.eps_fit.slope, PROV_FIT),
            "scale_exponent": _pv(diag.lambda_fit.slope, PROV_FIT),
            "uniform_bound_ratio": _pv(diag.bound_ratio, PROV_SOLVER),
        }

    passed = all(c["passed"] for c in checks)
    report = {
        "schema": _schema("verify-blowup-report"),
        "n": config.n,
        "eps_schedule": list(config.eps_schedule),
        "convention": verdict.convention,
        "checks": checks,
        "remainder": remainder,
        "passed": passed,
    }
    _write_json(os.path.join(out_dir, "report.json"), report)

    for c in checks:
        print("%-34s %s" % (c["name"],
                            "pass" if c["passed"] else "FAIL"), file=stream)
    print("sign convention resolved: %s" % verdict.convention, file=stream)
    print("overall: %s" % ("pass" if passed else "FAIL"), file=stream)
    return 0 if passed else 1


# ---------------------------------------------------------------------------
# supercritical


def _probe_rows(probe):
    rows = []
    for e in probe.entries:
        rows.append([
            _cell(float(e.eps)), PROV_FORMULA,
            _cell(bool(e.converged)),
            _cell(int(e.newton_iters)), PROV_SOLVER,
            _cell(float(e.residual)), PROV_SOLVER,
            _cell(float(e.M)), PROV_SOLVER,
            _cell(float(e.alpha)), PROV_SOLVER,
            _cell(float(e.lam)), PROV_SOLVER,
            _cell(float(e.v_norm)), PROV_SOLVER,
            _cell(float(e.lambda_d)), PROV_SOLVER,
            _cell(bool(e.concentrating)),
            e.failure or "",
        ])
    return rows


_PROBE_HEADER = [
    "eps", "eps_provenance",
    "converged",
    "newton_iters", "newton_iters_provenance",
    "residual", "residual_provenance",
    "peak", "peak_provenance",
    "alpha", "alpha_provenance",
    "lam", "lam_provenance",
    "v_norm", "v_norm_provenance",
    "lambda_d", "lambda_d_provenance",
    "concentrating",
    "failure",
]


def _contrast_section(eps_list, domain, grid, tol):
    """Solve the matched subcritical problem at the smallest requested
    offset (capped at 0.02, where the concentration test λ·d > 20
    holds) and report the three-part contrast with the supercritical
    attempts. Errors are recorded, not raised. The continuation solver
    is calibrated for dimension 6, so other dimensions skip this
    section rather than fail it."""
    if domain.n != 6:
        return {"skipped": "the subcritical contrast rides the "
                           "dimension-6 continuation solver"}
    target = min(CONTRAST_EPS_CAP, min(eps_list))
    chain = [e for e in DEFAULT_SCHEDULE if e > target] + [target]
    try:
        sweep = continuation_sweep(chain, domain, grid=grid, tol=tol)
        sol = sweep[-1]
        dec = decompose(sol, domain)
    except (ContinuationError, SolverDivergence, ValueError,
            RuntimeError) as exc:
        return {"eps": _pv(target, PROV_FORMULA), "error": str(exc)}
    v_rel = float(dec.v_norm) / math.sqrt(sol.energy_norm_sq())
    d = float(domain.radius - np.linalg.norm(np.asarray(dec.a)
                                             - domain.center))
    lambda_d = float(dec.lam) * d
    small_remainder = v_rel <= CONTRAST_V_REL
    amp_near_one = abs(float(dec.alpha) - 1.0) <= CONTRAST_AMP_TOL
    concentrated = lambda_d >= CONTRAST_LAMBDA_D
    return {
        "eps": _pv(target, PROV_FORMULA),
        "relative_remainder": _pv(v_rel, PROV_SOLVER),
        "alpha": _pv(float(dec.alpha), PROV_SOLVER),
        "lambda_d": _pv(lambda_d, PROV_SOLVER),
        "small_remainder": bool(small_remainder),
        "amplitude_near_unity": bool(amp_near_one),
        "concentrated": bool(concentrated),
        "passed": bool(small_remainder and amp_near_one and concentrated),
    }


def cmd_supercritical(config, lam_bounds, lam_samples, stations, out_dir,
                      stream=None):
    stream = stream or sys.stdout
    if config.n not in (5, 6):
        raise CliError("the supercritical paths support dimensions 5 "
                       "and 6 only")
    if not (0 < lam_bounds[0] < lam_bounds[1]):
        raise CliError("scale scan bounds must be ordered and positive")
    if stations < 3:
        raise CliError("the obstruction scan needs at least 3 stations")
    if lam_samples < 5:
        raise CliError("the obstruction scan needs at least 5 scale "
                       "samples")
    _ensure_dir(out_dir)
    config.to_json(os.path.join(out_dir, "config.json"))

    domain = config.domain()
    grid = default_grid(domain, config.grid_nodes)
    eps_list = sorted(config.eps_schedule)

    probe = supercritical_probe(eps_list, domain, grid=grid,
                                tol=config.quad_tol)
    _write_csv(os.path.join(out_dir, "probe.csv"), _PROBE_HEADER,
               _probe_rows(probe))

    obstruction = supercritical_obstruction(eps_list, domain,
                                            lam_bounds=lam_bounds,
                                            stations=stations,
                                            lam_samples=lam_samples)
    _write_csv(os.path.join(out_dir, "obstruction.csv"),
               ["eps", "eps_provenance",
                "scan_min", "scan_min_provenance",
                "floor", "floor_provenance",
                "margin", "margin_provenance",
                "positive",
                "subcritical_root", "subcritical_root_provenance",
                "subcritical_root_closed", "subcritical_root_closed_provenance"],
               [[_cell(float(e.eps)), PROV_FORMULA,
                 _cell(float(e.scan_min)), PROV_SOLVER,
                 _cell(float(e.floor)), PROV_FORMULA,
                 _cell(float(e.margin)), PROV_SOLVER,
                 _cell(bool(e.positive)),
                 _cell(float(e.subcritical_root)), PROV_SOLVER,
                 _cell(float(e.subcritical_root_closed)), PROV_FORMULA]
                for e in obstruction.entries])

    contrast = _contrast_section(eps_list, domain, grid, config.quad_tol)
    contrast_ok = bool(contrast.get("passed", "skipped" in contrast))

    report = {
        "schema": _schema("supercritical-report"),
        "n": config.n,
        "radius": _pv(config.radius, PROV_FORMULA),
        "eps_list": [_pv(e, PROV_FORMULA) for e in eps_list],
        "probe": {
            "any_concentrating": bool(probe.any_concentrating),
            "entries": [{
                "eps": _pv(float(e.eps), PROV_FORMULA),
                "converged": bool(e.converged),
                "peak": _pv(float(e.M), PROV_SOLVER),
                "alpha": _pv(float(e.alpha), PROV_SOLVER),
                "lam": _pv(float(e.lam), PROV_SOLVER),
                "relative_remainder": _pv(float(e.v_rel), PROV_SOLVER),
                "lambda_d": _pv(float(e.lambda_d), PROV_SOLVER),
                "concentrating": bool(e.concentrating),
                "failure": e.failure,
            } for e in probe.entries],
        },
        "obstruction": {
            "all_positive": bool(obstruction.all_positive),
            "boundary_exponent": {
                "value": obstruction.boundary_growth.slope,
                "expected": 4.0 - config.n,
                "provenance": PROV_FIT,
            },
            "entries": [{
                "eps": _pv(float(e.eps), PROV_FORMULA),
                "scan_min": _pv(float(e.scan_min), PROV_SOLVER),
                "floor": _pv(float(e.floor), PROV_FORMULA),
                "margin": _pv(float(e.margin), PROV_SOLVER),
                "positive": bool(e.positive),
                "subcritical_sign_change": bool(e.sign_change),
                "subcritical_root": _pv(e.subcritical_root, PROV_SOLVER),
                "subcritical_root_closed_form": _pv(
                    e.subcritical_root_closed, PROV_FORMULA),
            } for e in obstruction.entries],
        },
        "subcritical_contrast": contrast,
        "passed": bool((not probe.any_concentrating)
                       and obstruction.all_positive and contrast_ok),
    }
    _write_json(os.path.join(out_dir, "report.json"), report)

    print("supercritical probe: %s" % (
        "a branch concentrated (unexpected)" if probe.any_concentrating
        else "no attempt concentrated"), file=stream)
    print("balance obstruction: %s" % (
        "margin positive at every offset" if obstruction.all_positive
        else "margin NOT positive everywhere"), file=stream)
    if "skipped" in contrast:
        print("subcritical contrast: skipped (%s)" % contrast["skipped"],
              file=stream)
    elif "error" in contrast:
        print("subcritical contrast: failed (%s)" % contrast["error"],
              file=stream)
    else:
        print("subcritical contrast at eps %g: %s"
              % (contrast["eps"]["value"],
                 "pass" if contrast_ok else "FAIL"), file=stream)
    print("overall: %s" % ("pass" if report["passed"] else "FAIL"),
          file=stream)
    return 0 if report["passed"] else 1


# ---------------------------------------------------------------------------
# expansion orders


def cmd_expansion_orders(n, radius, rungs, lam_min, out_dir, stream=None):
    stream = stream or sys.stdout
    if n != 6:
        raise CliError("the deficit ladder is calibrated for dimension 6")
    if rungs < 4:
        raise CliError("the exponent fits need at least four ladder rungs")
    if not lam_min * radius >= 30.0:
        raise CliError("lam_min * radius must be at least 30 so every "
                       "rung is sharply concentrated")
    domain = BallDomain(n, np.zeros(n), radius)
    lams = lam_min * 10.0 ** np.linspace(0.0, 1.6, rungs)
    family = [BubbleParams(a=domain.center, lam=float(l), n=n)
              for l in lams]
    fits = expansion_orders(family, domain)

    expected = {
        "energy_norm": -(n - 4.0) / 2.0,
        "critical_norm": -(n - 4.0) / 2.0,
        "remainder_sup": -n / 2.0,
    }
    quantities = [
        ("energy_norm", fits.energy_norm),
        ("critical_norm", fits.critical_norm),
        ("remainder_sup", fits.remainder_sup),
    ]

    _ensure_dir(out_dir)
    rows = []
    all_ok = True
    for name, fit in quantities:
        ok = abs(fit.slope - expected[name]) <= ORDER_SLOPE_TOL
        all_ok = all_ok and ok
        rows.append([
            name,
            _cell(fit.slope), PROV_FIT,
            _cell(expected[name]), PROV_FORMULA,
            _cell(fit.rms_residual), PROV_FIT,
            _cell(bool(ok)),
        ])
    _write_csv(os.path.join(out_dir, "orders.csv"),
               ["quantity", "slope", "slope_provenance",
                "expected", "expected_provenance",
                "rms_residual", "rms_residual_provenance",
                "within_band"],
               rows)
    _write_json(os.path.join(out_dir, "orders.json"), {
        "schema": _schema("expansion-orders"),
        "n": n,
        "radius": _pv(radius, PROV_FORMULA),
        "ladder": [_pv(float(l), PROV_FORMULA) for l in lams],
        "fits": {name: {
            "slope": _pv(fit.slope, PROV_FIT),
            "expected": _pv(expected[name], PROV_FORMULA),
            "rms_residual": _pv(fit.rms_residual, PROV_FIT),
            "within_band": bool(abs(fit.slope - expected[name])
                                <= ORDER_SLOPE_TOL),
        } for name, fit in quantities},
        "band": ORDER_SLOPE_TOL,
        "passed": bool(all_ok),
    })

    for name, fit in quantities:
        print("%-15s slope %+.4f (expect %+.1f)"
              % (name, fit.slope, expected[name]), file=stream)
    print("overall: %s" % ("pass" if all_ok else "FAIL"), file=stream)
    return 0 if all_ok else 1


# ---------------------------------------------------------------------------
# argument parsing


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="navier-bubbles",
        description="Desk-scale numerics for near-critical fourth-order "
                    "concentration on balls.")
    sub = parser.add_subparsers(dest="command", required=True)

    c = sub.add_parser("constants",
                       help="print the closed-form constant table")
    c.add_argument("--n", type=int, default=6, help="dimension (>= 5)")
    c.add_argument("--out", default=None,
                   help="also write constants.csv into this directory")

    r = sub.add_parser("robin",
                       help="potential profile along a diameter plus "
                            "boundary blow-up fits")
    r.add_argument("--n", type=int, default=6, help="dimension (>= 5)")
    r.add_argument("--radius", type=float, default=1.0)
    r.add_argument("--stations", type=int, default=21,
                   help="odd station count along the diameter")
    r.add_argument("--out", default=os.path.join("runs", "robin"))

    v = sub.add_parser("verify-blowup",
                       help="run the continuation sweep and judge the "
                            "blow-up laws")
    v.add_argument("--config", default=None,
                   help="JSON run configuration (excludes other run "
                        "flags)")
    v.add_argument("--n", type=int, default=None)
    v.add_argument("--radius", type=float, default=None)
    v.add_argument("--eps", type=float, nargs="+", default=None,
                   help="decreasing positive offsets")
    v.add_argument("--grid-nodes", type=int, default=None)
    v.add_argument("--tol", type=float, default=None)
    v.add_argument("--seed", type=int, default=None)
    v.add_argument("--out", default=None)

    s = sub.add_parser("supercritical",
                       help="obstruction certificate, continuation probe "
                            "and subcritical contrast")
    s.add_argument("--config", default=None,
                   help="JSON run configuration (excludes other run "
                        "flags)")
    s.add_argument("--n", type=int, default=None, choices=(5, 6))
    s.add_argument("--radius", type=float, default=None)
    s.add_argument("--eps", type=float, nargs="+", default=None,
                   help="positive supercritical offsets")
    s.add_argument("--grid-nodes", type=int, default=None)
    s.add_argument("--tol", type=float, default=None)
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--stations", type=int, default=10)
    s.add_argument("--lam-lo", type=float, default=5.0)
    s.add_argument("--lam-hi", type=float, default=1e4)
    s.add_argument("--lam-samples", type=int, default=25)
    s.add_argument("--out", default=None)

    e = sub.add_parser("expansion-orders",
                       help="fit the deficit decay exponents over a "
                            "scale ladder")
    e.add_argument("--n", type=int, default=6)
    e.add_argument("--radius", type=float, default=1.0)
    e.add_argument("--rungs", type=int, default=6)
    e.add_argument("--lam-min", type=float, default=60.0)
    e.add_argument("--out", default=os.path.join("runs",
                                                 "expansion-orders"))
    return parser


def _config_from_args(args, default_schedule):
    """Build the run configuration from --config or from flags; mixing
    the two is rejected so the on-disk file stays authoritative."""
    flag_values = {
        "n": args.n,
        "radius": args.radius,
        "eps_schedule": tuple(args.eps) if args.eps is not None else None,
        "grid_nodes": args.grid_nodes,
        "quad_tol": args.tol,
        "seed": args.seed,
    }
    explicit = {k: v for k, v in flag_values.items() if v is not None}
    if args.config is not None:
        if explicit:
            raise CliError("--config excludes the run flags (%s)"
                           % ", ".join(sorted(explicit)))
        return RunConfig.from_json(args.config)
    defaults = {"n": 6, "radius": 1.0, "eps_schedule": default_schedule,
                "grid_nodes": 2048, "quad_tol": 1e-10, "seed": 0}
    defaults.update(explicit)
    out_dir = args.out if args.out is not None else "runs"
    return RunConfig(out_dir=out_dir, **defaults)


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "constants":
            return cmd_constants(args.n, out_dir=args.out)
        if args.command == "robin":
            return cmd_robin(args.n, args.radius, args.stations, args.out)
        if args.command == "verify-blowup":
            config = _config_from_args(args, DEFAULT_SCHEDULE)
            out = os.path.join(config.out_dir, "verify-blowup")
            return cmd_verify_blowup(config, out)
        if args.command == "supercritical":
            if args.eps is not None:
                args.eps = sorted(set(args.eps), reverse=True)
            config = _config_from_args(args, (0.09, 0.05, 0.02))
            out = os.path.join(config.out_dir, "supercritical")
            return cmd_supercritical(
                config, (args.lam_lo, args.lam_hi), args.lam_samples,
                args.stations, out)
        if args.command == "expansion-orders":
            return cmd_expansion_orders(args.n, args.radius, args.rungs,
                                        args.lam_min, args.out)
        raise AssertionError("unreachable subcommand %r" % args.command)
    except CliError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

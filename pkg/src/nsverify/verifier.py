"""
Verification procedures built from analytic fields and grid operators.

Every check returns a :class:`VerificationReport`.  Tolerances are attached
only where an identity must hold (incompressibility, vorticity closed forms,
exact solutions); everything else is measured and reported as
informational so the tool stays a neutral instrument.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import gridops
from .fieldkit import AnalyticField, SelfSimilarFamily
from .gridops import Grid, SampledField
from .scalecalc import as_rational

__all__ = [
    "VerificationReport", "check_divergence", "nse_residual", "bouton_residual",
    "selfsimilarity_check", "vorticity_crosscheck", "run_suite",
    "reports_to_json", "reports_to_table", "convergence_rate",
    "SPECTRAL_TOL", "MIN_RATE",
]

SPECTRAL_TOL = 1e-9
MIN_RATE = 3.8
EXACT_SOLUTION_TOL = 1e-8
# one-sided FD4 stencils leave O(h^4) noise on the edges of derived sources
DERIVED_SOURCE_TOL = 1e-6
# fine-grid errors below this are round-off; a rate is meaningless there
_ROUNDOFF_FLOOR = 1e-12
_COMPLEX_STEP = 1e-20

VERDICTS = ("pass", "fail", "informational")


@dataclass(frozen=True)
class VerificationReport:
    """Named measurements with optional bounds.

    ``tolerances`` maps a value name to ``{"max": bound}`` or
    ``{"min": bound}``.  The verdict is ``pass`` iff every bounded value
    satisfies its bound; a report without bounds is ``informational``.
    """

    check: str
    values: Mapping[str, float]
    tolerances: Mapping[str, Mapping[str, float]] = field(default_factory=dict)
    claim: str = ""

    def __post_init__(self):
        missing = set(self.tolerances) - set(self.values)
        if missing:
            raise ValueError(f"tolerances given for unmeasured values: {sorted(missing)}")

    @property
    def verdict(self) -> str:
        if not self.tolerances:
            return "informational"
        for name, bound in self.tolerances.items():
            v = self.values[name]
            if math.isnan(v):
                return "fail"
            if "max" in bound and not v <= bound["max"]:
                return "fail"
            if "min" in bound and not v >= bound["min"]:
                return "fail"
        return "pass"

    @property
    def passed(self) -> bool:
        return self.verdict != "fail"

    def to_json(self) -> dict:
        return {
            "check": self.check,
            "values": {k: _fmt(v) for k, v in sorted(self.values.items())},
            "tolerances": {k: {b: _fmt(x) for b, x in sorted(v.items())}
                           for k, v in sorted(self.tolerances.items())},
            "verdict": self.verdict,
            "paper_ref": self.claim,
        }


def _fmt(value):
    value = float(value)
    if not math.isfinite(value):
        return str(value)
    return float(format(value, ".12g"))


def reports_to_json(reports: Sequence[VerificationReport]) -> str:
    """Deterministic JSON array (sorted by check name, 12 significant digits)."""
    ordered = sorted(reports, key=lambda r: r.check)
    return json.dumps([r.to_json() for r in ordered], indent=2)


def reports_to_table(reports: Sequence[VerificationReport]) -> str:
    rows = []
    for r in sorted(reports, key=lambda r: r.check):
        for i, (name, value) in enumerate(sorted(r.values.items())):
            bound = r.tolerances.get(name, {})
            limit = " ".join(f"{k} {v:.3g}" for k, v in bound.items())
            rows.append((r.check if i == 0 else "", name, f"{value:.6g}", limit,
                         r.verdict if i == 0 else ""))
    header = ("check", "value", "measured", "bound", "verdict")
    widths = [max(len(str(row[i])) for row in rows + [header]) for i in range(5)]
    line = lambda row: "  ".join(str(c).ljust(w) for c, w in zip(row, widths)).rstrip()
    return "\n".join([line(header), line(tuple("-" * w for w in widths))] + [line(r) for r in rows])


def convergence_rate(err_coarse: float, err_fine: float) -> float:
    """Observed order ``log2(err(N) / err(2N))``."""
    if err_fine <= 0 or err_coarse <= 0:
        return math.inf
    return math.log2(err_coarse / err_fine)


def _coarser(grid: Grid) -> Grid:
    half = tuple(n // 2 for n in grid.n)
    if min(half) < 8:
        raise ValueError("a convergence check needs at least 16 points per axis")
    return Grid(grid.kind, grid.extents, half)


def _rms(values):
    """Root-mean-square over the nodes (the discrete L2 norm up to volume)."""
    return float(np.sqrt(np.mean(np.asarray(values) ** 2)))


def _linf(values):
    values = np.asarray(values)
    return float(np.abs(values).max()) if values.size else 0.0


# -- incompressibility ---------------------------------------------------------

def check_divergence(field_: AnalyticField, grid: Grid, t: float = 0.0) -> VerificationReport:
    """Measure ``div u`` on the grid.

    Periodic grids are held to the spectral tolerance.  On truncated grids
    the absolute error depends on resolution, so the check instead asserts
    the fourth-order decay of the discrete L2 error against a grid with half
    the points.
    """
    div = gridops.divergence(gridops.sample(field_, grid, t)).data
    values = {"div_linf": _linf(div), "div_l2": _rms(div)}
    claim = "incompressibility: the velocity field is divergence-free"
    if grid.kind == "periodic":
        return VerificationReport("divergence", values, {"div_linf": {"max": SPECTRAL_TOL}}, claim)
    coarse = gridops.divergence(gridops.sample(field_, _coarser(grid), t)).data
    return _rate_report("divergence", values, "div_l2", _rms(coarse), claim)


def _rate_report(name, values, l2_key, coarse_err, claim):
    """Bound the observed order; fall back to an absolute bound at round-off."""
    values = dict(values)
    fine_err = values[l2_key]
    if fine_err < _ROUNDOFF_FLOOR:
        return VerificationReport(name, values, {l2_key: {"max": _ROUNDOFF_FLOOR}}, claim)
    values["rate"] = convergence_rate(coarse_err, fine_err)
    return VerificationReport(name, values, {"rate": {"min": MIN_RATE}}, claim)


# -- vorticity -----------------------------------------------------------------

def vorticity_crosscheck(field_: AnalyticField, grid: Grid, t: float = 0.0) -> VerificationReport:
    """Compare the discrete curl with the field's closed-form vorticity."""
    if not field_.has_vorticity:
        raise ValueError(f"{field_.name} carries no exact vorticity")

    def error(g):
        sf = gridops.sample(field_, g, t)
        exact = np.asarray(field_.vorticity(g.mesh, t), dtype=float)
        return gridops.curl(sf).data - exact

    err = error(grid)
    values = {"error_linf": _linf(err), "error_l2": _rms(err)}
    claim = "closed-form vorticity of the example field"
    if grid.kind == "periodic":
        return VerificationReport("vorticity", values, {"error_linf": {"max": SPECTRAL_TOL}}, claim)
    return _rate_report("vorticity", values, "error_l2", _rms(error(_coarser(grid))), claim)


# -- momentum balance ----------------------------------------------------------

def _convective(u: SampledField) -> np.ndarray:
    g = u.grid
    return sum(u.data[j] * gridops.derivative(u.data, g, j) for j in range(g.dim))


def nse_residual(field_: AnalyticField, grid: Grid, t: float = 0.0, nu: float | None = None
                 ) -> VerificationReport:
    """Test whether the sampled field satisfies the momentum equation.

    With ``f = nu*Lap(u) - du/dt - (u.grad)u`` the equation holds iff
    ``f`` is a pressure gradient.  Reported values:

    ``compatibility_linf``
        sup of ``curl f``; zero iff some pressure exists.
    ``closure_linf``
        sup of ``f - grad p`` with ``p`` recovered from ``Lap p = div f``.
    ``exact_closure_linf``, ``pressure_mismatch_linf``
        with the field's own pressure, when it has one; the mismatch is
        taken after removing means, so it ignores additive constants.
    ``claimed_gradient_closure_linf``
        with a stored pressure gradient formula, when present.
    ``convective_linf``
        sup of ``(u.grad)u``.

    Bounds are attached only for fields flagged as exact solutions.
    """
    nu = field_.params.nu if nu is None else float(nu)
    u = gridops.sample(field_, grid, t)
    dudt = np.asarray(field_.dudt(grid.mesh, t), dtype=float) * np.ones_like(u.data)
    conv = _convective(u)
    f = u._like(nu * gridops.laplacian(u).data - dudt - conv, False)

    values = {"convective_linf": _linf(conv), "residual_force_linf": _linf(f.data)}
    if grid.dim > 1:
        values["compatibility_linf"] = _linf(gridops.curl(f).data)
    p = gridops.poisson_solve(gridops.divergence(f), DERIVED_SOURCE_TOL)
    values["closure_linf"] = _linf(f.data - gridops.gradient(p).data)
    if "wraparound_estimate" in p.meta:
        values["poisson_wraparound_estimate"] = p.meta["wraparound_estimate"]

    if field_.has_pressure:
        p_exact = u._like(np.asarray(field_.pressure(grid.mesh, t), dtype=float)
                          * np.ones(grid.shape), True)
        values["exact_closure_linf"] = _linf(f.data - gridops.gradient(p_exact).data)
        diff = p.data - p_exact.data
        values["pressure_mismatch_linf"] = _linf(diff - diff.mean())
    if field_.pressure_gradient_fn is not None:
        claimed = np.asarray(field_.pressure_gradient(grid.mesh, t), dtype=float)
        values["claimed_gradient_closure_linf"] = _linf(f.data - claimed)

    tolerances = {}
    if field_.exact_solution:
        bounded = ("closure_linf", "exact_closure_linf", "pressure_mismatch_linf")
        tolerances = {k: {"max": EXACT_SOLUTION_TOL} for k in bounded if k in values}
    claim = "momentum balance of the incompressible Navier-Stokes equations"
    return VerificationReport("nse-residual", values, tolerances, claim)


# -- scaling-invariance equations ----------------------------------------------

def _radial_derivative(fn, coords, t):
    """``(r.grad) g`` at ``coords`` by a complex step along the position vector."""
    shifted = [c * (1 + 1j * _COMPLEX_STEP) for c in coords]
    return np.imag(np.asarray(fn(shifted, t))) / _COMPLEX_STEP


def bouton_residual(field_: AnalyticField, alpha_x, alpha_t, points, tol: float | None = None
                    ) -> VerificationReport:
    """Residuals of the first-order equations expressing self-similarity.

    A field invariant under the group with exponents ``(alpha_x, alpha_t)``
    satisfies::

        (r.grad)u + t (alpha_t/alpha_x) du/dt = ((alpha_x - alpha_t)/alpha_x) u
        (r.grad)p + t (alpha_t/alpha_x) dp/dt = (2 (alpha_x - alpha_t)/alpha_x) p

    The radial derivative is a complex-step derivative of the closed form,
    exact to round-off; time derivatives come from the closed forms.
    ``points`` has shape ``(n, dim + 1)`` with time last; every time must
    be positive.
    """
    ax, at = as_rational(alpha_x), as_rational(alpha_t)
    if ax == 0:
        raise ValueError("alpha_x must be nonzero")
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != field_.dim + 1:
        raise ValueError(f"points must have shape (n, {field_.dim + 1})")
    t = pts[:, -1]
    if np.any(t <= 0):
        raise ValueError("self-similar forms are singular at t = 0; sample t > 0 only")
    coords = [pts[:, i] for i in range(field_.dim)]
    ratio = float(at / ax)

    u = np.asarray(field_.velocity(coords, t), dtype=float)
    lhs = _radial_derivative(field_.velocity, coords, t) + t * ratio * field_.dudt(coords, t)
    rhs = float((ax - at) / ax) * u
    values = {"velocity_residual": _linf(lhs - rhs), "velocity_scale": _linf(u)}
    if field_.has_pressure:
        p = np.asarray(field_.pressure(coords, t), dtype=float)
        lhs_p = _radial_derivative(field_.pressure, coords, t) + t * ratio * field_.dpdt(coords, t)
        values["pressure_residual"] = _linf(lhs_p - float(2 * (ax - at) / ax) * p)
    tolerances = {}
    if tol is not None:
        tolerances = {k: {"max": tol} for k in ("velocity_residual", "pressure_residual")
                      if k in values}
    claim = "augmented system: Euler-operator equations for self-similar velocity and pressure"
    return VerificationReport("bouton-residual", values, tolerances, claim)


def selfsimilarity_check(family: SelfSimilarFamily, ks: Sequence, points, tol: float = 1e-12
                         ) -> VerificationReport:
    """Max of ``|u_k(k^ax x, k^at t) - k^e u_1(x, t)|`` over ``ks`` and ``points``.

    ``e`` is the family's velocity exponent.
    """
    pts = np.asarray(points, dtype=float)
    dim = family.base.dim
    if pts.ndim != 2 or pts.shape[1] != dim + 1:
        raise ValueError(f"points must have shape (n, {dim + 1})")
    coords, t = [pts[:, i] for i in range(dim)], pts[:, -1]
    base = np.asarray(family.member(1).velocity(coords, t))
    ax, at = float(family.alpha_x), float(family.alpha_t)
    e = float(family.velocity_exponent)
    worst = 0.0
    for k in ks:
        k = float(as_rational(k)) if not isinstance(k, float) else k
        if not k > 0:
            raise ValueError("scale factors must be positive")
        moved = family.member(k).velocity([k ** ax * c for c in coords], k ** at * t)
        worst = max(worst, _linf(np.asarray(moved) - k ** e * base))
    claim = "velocity scaling law of the group acting on a self-similar family"
    return VerificationReport("self-similarity", {"deviation_linf": worst},
                              {"deviation_linf": {"max": tol}}, claim)


# -- suites --------------------------------------------------------------------

def run_suite(field_: AnalyticField, grid: Grid, t: float = 0.0, nu: float | None = None
              ) -> list[VerificationReport]:
    """Divergence, vorticity (when a closed form exists) and momentum residual."""
    reports = [check_divergence(field_, grid, t)]
    if field_.has_vorticity:
        reports.append(vorticity_crosscheck(field_, grid, t))
    if field_.dudt_fn is not None and grid.dim > 1:
        reports.append(nse_residual(field_, grid, t, nu))
    return sorted(reports, key=lambda r: r.check)

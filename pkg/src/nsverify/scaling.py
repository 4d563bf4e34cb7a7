"""
Norm-scaling exponents. Predictions are exact rationals computed from
isobaric weights; measurements fit log-log slopes over a rescaled family.

For a field whose weights are ``(beta_x, beta_t)`` with ``r = beta_x/beta_t``,
the predicted exponents are ``2r - 3`` (sup vorticity), ``2(r - 1)`` (sup
velocity) and ``4r - 1`` (energy over the co-scaled cell).
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import gridops
from .fieldkit import AnalyticField, embed
from .gridops import DEFAULT_RADIUS_FACTOR, Grid
from .scalecalc import WeightAssignment, as_rational

__all__ = [
    "ExponentRecord", "ScalingLaw", "MeasuredExponent", "STANDARD_LAW",
    "TABLE_RATIOS", "NORM_KINDS", "BLOWUP_THRESHOLD",
    "predict_exponents", "table1", "table1_csv", "table1_json", "rescale",
    "measure_exponent",
]

BLOWUP_THRESHOLD = Fraction(3, 2)
TABLE_RATIOS = tuple(Fraction(r) for r in ("-2", "-1", "-1/2", "0", "1/2", "1", "6/5", "3/2", "2", "3"))
NORM_KINDS = ("sup_vorticity", "sup_velocity", "energy")


@dataclass(frozen=True)
class ExponentRecord:
    r: Fraction
    omega_exp: Fraction
    u_exp: Fraction
    E_exp: Fraction

    @property
    def blowup_safe(self) -> bool:
        return self.r > BLOWUP_THRESHOLD

    def exponent(self, norm_kind: str) -> Fraction:
        return {"sup_vorticity": self.omega_exp, "sup_velocity": self.u_exp,
                "energy": self.E_exp}[norm_kind]

    def to_json(self):
        q = lambda v: {"num": v.numerator, "den": v.denominator}
        return {"r": q(self.r), "omega_exp": q(self.omega_exp), "u_exp": q(self.u_exp),
                "E_exp": q(self.E_exp), "blowup_safe": self.blowup_safe}


def predict_exponents(beta_x, beta_t=1) -> ExponentRecord:
    """Exact exponents for weights ``(beta_x, beta_t)``."""
    bx, bt = as_rational(beta_x), as_rational(beta_t)
    if bt == 0:
        raise ValueError("beta_t must be nonzero")
    r = bx / bt
    return ExponentRecord(r, 2 * r - 3, 2 * (r - 1), 4 * r - 1)


def table1() -> list[ExponentRecord]:
    return [predict_exponents(r) for r in TABLE_RATIOS]


def table1_csv() -> str:
    """CSV with header ``r,omega_exp,u_exp,E_exp``; values as decimals (``-0.6``)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["r", "omega_exp", "u_exp", "E_exp"])
    for rec in table1():
        writer.writerow([repr(float(v)) for v in (rec.r, rec.omega_exp, rec.u_exp, rec.E_exp)])
    return buf.getvalue()


def table1_json() -> str:
    return json.dumps([rec.to_json() for rec in table1()], indent=2)


@dataclass(frozen=True)
class ScalingLaw:
    """Group exponents ``(alpha_x, alpha_t, alpha_rho)`` and derived exponents.

    ``exponents`` uses the kinematic pressure weight ``2(alpha_x - alpha_t)``;
    ``density_pressure_exponent`` is the alternative
    ``alpha_rho - 2 alpha_x - 2 alpha_t`` kept for comparison.
    """

    alpha_x: Fraction = Fraction(1)
    alpha_t: Fraction = Fraction(2)
    alpha_rho: Fraction = Fraction(0)

    def __post_init__(self):
        for name in ("alpha_x", "alpha_t", "alpha_rho"):
            object.__setattr__(self, name, as_rational(getattr(self, name)))

    @property
    def weights(self) -> WeightAssignment:
        return WeightAssignment(self.alpha_x, self.alpha_t, self.alpha_rho)

    @property
    def exponents(self) -> dict:
        wa = self.weights
        return {s: wa[s].value for s in ("x", "t", "u", "p", "nu", "rho")}

    @property
    def density_pressure_exponent(self) -> Fraction:
        return self.alpha_rho - 2 * self.alpha_x - 2 * self.alpha_t

    @property
    def is_standard(self) -> bool:
        return self.alpha_t == 2 * self.alpha_x


STANDARD_LAW = ScalingLaw()


def rescale(field: AnalyticField, law: ScalingLaw, k) -> AnalyticField:
    """Apply the group element ``k`` to the field's parameters.

    Lengths scale by ``k^alpha_x``, ``T`` by ``k^alpha_t``, ``U`` by
    ``k^(alpha_x - alpha_t)`` and ``nu`` by ``k^(2 alpha_x - alpha_t)``; a
    ``T``-carried prefactor therefore picks up its own weight.
    """
    return embed(field, law.alpha_x, law.alpha_t).member(k)


@dataclass(frozen=True)
class MeasuredExponent:
    norm_kind: str
    ks: tuple
    values: tuple
    slope: float
    fit_residual: float
    predicted: Fraction | None = None

    @property
    def deviation(self) -> float | None:
        return None if self.predicted is None else abs(self.slope - float(self.predicted))


def _cell_grid(field: AnalyticField, n: int, radius_factor: float) -> Grid:
    if field.decay == "periodic":
        return Grid.periodic(field.periods, n, field.dim)
    if field.decay == "schwartz":
        return Grid.truncated(radius_factor * field.length_scale, n, field.dim)
    raise ValueError(f"{field.name}: no grid for decay class {field.decay!r}")


def _norm(field: AnalyticField, grid: Grid, t: float, norm_kind: str) -> float:
    sf = gridops.sample(field, grid, t)
    if norm_kind == "sup_velocity":
        return float(sf.magnitude().max())
    if norm_kind == "sup_vorticity":
        return gridops.norms(sf).sup_vorticity
    energy = gridops.norms(sf, omega=sf).energy
    # planar fields are integrated over a slab whose depth co-scales with the cell
    missing = 3 - grid.dim
    if missing:
        depth = grid.extents[0] if grid.kind == "periodic" else 2 * grid.extents[0]
        energy *= depth ** missing
    return energy


def measure_exponent(field: AnalyticField, law: ScalingLaw, norm_kind: str, ks: Sequence,
                     n: int = 32, radius_factor: float = DEFAULT_RADIUS_FACTOR, t: float = 0.0
                     ) -> MeasuredExponent:
    """Fit the power law ``N(k) ~ k^s`` of a norm across the family ``rescale(field, law, k)``.

    Each member is sampled on its own rescaled cell (``[0, 2 pi L']^d``
    periodic, half-width ``radius_factor * L'`` truncated) at time
    ``k^alpha_t t``, so every member is resolved identically.  The slope is
    an ordinary least-squares fit in log-log space; ``fit_residual`` is the
    RMS of the log residuals.
    """
    if norm_kind not in NORM_KINDS:
        raise ValueError(f"norm kind must be one of {NORM_KINDS}")
    ks = tuple(sorted({float(as_rational(k)) if not isinstance(k, float) else k for k in ks}))
    if len(ks) < 3:
        raise ValueError("need at least three distinct scale factors")
    if ks[0] <= 0:
        raise ValueError("scale factors must be positive")
    family = embed(field, law.alpha_x, law.alpha_t)
    values = []
    for k in ks:
        member = family.member(k)
        values.append(_norm(member, _cell_grid(member, n, radius_factor), k ** float(law.alpha_t) * t,
                            norm_kind))
    if min(values) <= 0:
        raise ValueError(f"{norm_kind} vanishes for some member; no power law to fit")
    x, y = np.log(ks), np.log(values)
    slope, intercept = np.polyfit(x, y, 1)
    residual = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    predicted = None
    if field.beta is not None and law.is_standard:
        # the tabulated exponents are per unit alpha_x
        predicted = law.alpha_x * predict_exponents(*field.beta).exponent(norm_kind)
    return MeasuredExponent(norm_kind, ks, tuple(values), float(slope), residual, predicted)

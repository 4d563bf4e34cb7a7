"""
Isobaric weights under the scaling group of the incompressible NSE.

A weight is an exact rational linear form in the group exponents
``alpha_x``, ``alpha_t`` and ``alpha_rho``; when all three are given as
numbers the form collapses to a rational constant.  Keeping the exponents
symbolic lets one check an equation for every member of the group at once.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from fractions import Fraction
from numbers import Rational
from typing import Mapping, Sequence, Union

from .expr import Const, Derivative, Expression, Func, Power, Product, Sum, Symbol, parse

__all__ = [
    "Weight", "NotIsobaric", "WeightAssignment", "UnknownSymbolError",
    "InvarianceReport", "weight", "check_invariance", "as_rational",
]

_BASIS = ("alpha_x", "alpha_t", "alpha_rho")


def as_rational(value) -> Fraction:
    """Exact rational from an int, Fraction or ``"p/q"`` string.

    Floats are refused: weights and thresholds are exact quantities.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"malformed rational {value!r}") from exc
    raise TypeError(f"expected an exact rational, got {type(value).__name__}")


class Weight:
    """Linear form ``c + a*alpha_x + b*alpha_t + d*alpha_rho`` with rational coefficients."""

    __slots__ = ("_coeffs",)

    def __init__(self, const=0, alpha_x=0, alpha_t=0, alpha_rho=0):
        self._coeffs = tuple(as_rational(c) for c in (const, alpha_x, alpha_t, alpha_rho))

    @classmethod
    def basis(cls, name):
        idx = _BASIS.index(name)
        coeffs = [0, 0, 0, 0]
        coeffs[idx + 1] = 1
        return cls(*coeffs)

    @classmethod
    def coerce(cls, value):
        return value if isinstance(value, Weight) else cls(as_rational(value))

    @property
    def coeffs(self):
        return self._coeffs

    @property
    def is_constant(self):
        return not any(self._coeffs[1:])

    @property
    def value(self) -> Fraction:
        if not self.is_constant:
            raise ValueError(f"weight {self} depends on the group exponents")
        return self._coeffs[0]

    def __add__(self, other):
        other = Weight.coerce(other)
        return Weight(*(a + b for a, b in zip(self._coeffs, other._coeffs)))

    __radd__ = __add__

    def __neg__(self):
        return Weight(*(-a for a in self._coeffs))

    def __sub__(self, other):
        return self + (-Weight.coerce(other))

    def __rsub__(self, other):
        return Weight.coerce(other) - self

    def __mul__(self, q):
        if isinstance(q, Weight):
            if q.is_constant:
                q = q.value
            elif self.is_constant:
                return q * self.value
            else:
                raise TypeError("product of two symbolic weights is not linear")
        q = as_rational(q)
        return Weight(*(a * q for a in self._coeffs))

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, Weight):
            return self._coeffs == other._coeffs
        try:
            other = as_rational(other)
        except TypeError:
            return NotImplemented
        return self.is_constant and self._coeffs[0] == other

    def __hash__(self):
        if self.is_constant:
            return hash(self._coeffs[0])
        return hash(self._coeffs)

    def __repr__(self):
        return f"Weight({self})"

    def __str__(self):
        parts = []
        for coeff, name in zip(self._coeffs, ("",) + _BASIS):
            if coeff == 0:
                continue
            if not name:
                parts.append(str(coeff))
            elif coeff == 1:
                parts.append(name)
            elif coeff == -1:
                parts.append(f"-{name}")
            else:
                parts.append(f"{coeff}*{name}")
        if not parts:
            return "0"
        text = parts[0]
        for part in parts[1:]:
            text += f" - {part[1:]}" if part.startswith("-") else f" + {part}"
        return text

    def to_json(self):
        if self.is_constant:
            q = self.value
            return {"num": q.numerator, "den": q.denominator}
        return {name: {"num": c.numerator, "den": c.denominator}
                for name, c in zip(("const",) + _BASIS, self._coeffs) if c != 0}


@dataclass(frozen=True)
class NotIsobaric:
    """Marker for a sum whose addends carry different weights."""
    left: Weight
    right: Weight

    def __str__(self):
        return f"not isobaric ({self.left} vs {self.right})"

    def to_json(self):
        return {"not_isobaric": [self.left.to_json(), self.right.to_json()]}


IsobaricWeight = Union[Weight, NotIsobaric]


class UnknownSymbolError(KeyError):
    pass


_LENGTHS = ("x", "y", "z", "L", "L1", "L2", "L3", "h")
_TIMES = ("t", "T")
_VELOCITIES = ("u", "v", "w", "U")
_ALIASES = {"ν": "nu", "ρ": "rho", "L₁": "L1", "L₂": "L2", "L₃": "L3"}


@dataclass(frozen=True)
class WeightAssignment:
    """Symbol weights derived from the group exponents.

    Any exponent left as ``None`` stays symbolic.  ``overrides`` replaces
    individual symbol weights, e.g. ``{"nu": 0}`` for a fixed viscosity.
    """

    alpha_x: Fraction | None = None
    alpha_t: Fraction | None = None
    alpha_rho: Fraction | None = None
    overrides: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self):
        for name in _BASIS:
            val = getattr(self, name)
            if val is not None:
                object.__setattr__(self, name, as_rational(val))
        object.__setattr__(
            self, "overrides",
            {_ALIASES.get(k, k): Weight.coerce(v) for k, v in dict(self.overrides).items()})

    def _base(self, name):
        val = getattr(self, name)
        return Weight.basis(name) if val is None else Weight(val)

    @cached_property
    def table(self) -> dict:
        ax, at, arho = (self._base(n) for n in _BASIS)
        table = {}
        table.update({s: ax for s in _LENGTHS})
        table.update({s: at for s in _TIMES})
        table.update({s: ax - at for s in _VELOCITIES})
        table["nu"] = 2 * ax - at
        table["p"] = 2 * (ax - at)
        table["rho"] = arho
        table["Re"] = -table["nu"]
        table.update({name: Weight() for name in _BASIS})
        table.update(self.overrides)
        return table

    def __getitem__(self, name) -> Weight:
        name = _ALIASES.get(name, name)
        try:
            return self.table[name]
        except KeyError:
            raise UnknownSymbolError(name) from None

    def __contains__(self, name):
        return _ALIASES.get(name, name) in self.table

    @property
    def is_standard(self) -> bool:
        """True iff the viscosity does not rescale (``alpha_t == 2*alpha_x``)."""
        return (2 * self._base("alpha_x") - self._base("alpha_t")) == 0


def weight(expr, wa: WeightAssignment) -> IsobaricWeight:
    """Isobaric weight of ``expr`` (text or tree) under ``wa``."""
    if isinstance(expr, str):
        expr = parse(expr)
    return _weight(expr, wa)


def _weight(node: Expression, wa) -> IsobaricWeight:
    if isinstance(node, Const):
        return Weight()
    if isinstance(node, Symbol):
        return wa[node.name]
    if isinstance(node, Product):
        total = Weight()
        for f in node.factors:
            w = _weight(f, wa)
            if isinstance(w, NotIsobaric):
                return w
            total = total + w
        return total
    if isinstance(node, Power):
        w = _weight(node.base, wa)
        return w if isinstance(w, NotIsobaric) else node.exponent * w
    if isinstance(node, Sum):
        first = None
        for term in node.terms:
            w = _weight(term, wa)
            if isinstance(w, NotIsobaric):
                return w
            if first is None:
                first = w
            elif w != first:
                return NotIsobaric(first, w)
        return first
    if isinstance(node, Derivative):
        w = _weight(node.expr, wa)
        return w if isinstance(w, NotIsobaric) else w - wa[node.var]
    if isinstance(node, Func):
        w = _weight(node.arg, wa)
        if isinstance(w, NotIsobaric):
            return w
        return Weight() if w == 0 else NotIsobaric(w, Weight())
    raise TypeError(f"not an expression node: {node!r}")


@dataclass(frozen=True)
class InvarianceReport:
    terms: tuple
    term_weights: tuple
    invariant: bool
    common_weight: Weight | None

    def to_json(self):
        return {
            "terms": [str(t) for t in self.terms],
            "term_weights": [w.to_json() for w in self.term_weights],
            "invariant": self.invariant,
            "common_weight": None if self.common_weight is None else self.common_weight.to_json(),
        }


def check_invariance(terms: Sequence, wa: WeightAssignment) -> InvarianceReport:
    """Decide whether the equation ``sum(terms) == 0`` is invariant under ``wa``.

    Invariant iff every term is isobaric and all share one weight.
    """
    if not terms:
        raise ValueError("an equation needs at least one term")
    exprs = tuple(parse(t) if isinstance(t, str) else t for t in terms)
    ws = tuple(_weight(e, wa) for e in exprs)
    iso = [w for w in ws if isinstance(w, Weight)]
    invariant = len(iso) == len(ws) and all(w == iso[0] for w in iso)
    return InvarianceReport(exprs, ws, invariant, iso[0] if invariant else None)

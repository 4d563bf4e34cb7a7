"""Expression parsing and isobaric-weight calculus."""

from .expr import (
    FUNCTIONS, Const, Derivative, Expression, Func, ParseError, Power, Product,
    Sum, Symbol, UnknownFunctionError, parse, symbols, to_text,
)
from .weights import (
    InvarianceReport, NotIsobaric, UnknownSymbolError, Weight, WeightAssignment,
    as_rational, check_invariance, weight,
)

__all__ = [
    "FUNCTIONS", "Const", "Derivative", "Expression", "Func", "ParseError",
    "Power", "Product", "Sum", "Symbol", "UnknownFunctionError", "parse",
    "symbols", "to_text", "InvarianceReport", "NotIsobaric",
    "UnknownSymbolError", "Weight", "WeightAssignment", "as_rational",
    "check_invariance", "weight",
]

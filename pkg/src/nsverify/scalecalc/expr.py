"""
Expression trees for the weight calculus.

Grammar (whitespace is insignificant)::

    expr     := term (('+' | '-') term)*
    term     := unary (('*' | '/') unary)*
    unary    := ('-' | '+') unary | power
    power    := atom ('^' exponent)?
    exponent := unary                  # must fold to a rational constant
    atom     := number | name | call | '(' expr ')'
    call     := ('sin' | 'cos' | 'exp') '(' expr ')'
              | 'd' '(' expr ',' name ')'

Numbers are integers or decimals and are stored as exact fractions.
Subtraction and division are desugared at parse time: ``a - b`` becomes
``Sum(a, Product(Const(-1), b))`` and ``a / b`` becomes
``Product(a, Power(b, -1))``.  A quotient of two literal constants is folded
into a single constant, and a unary minus on a literal negates it.

The printer emits text that parses back to the identical tree.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

__all__ = [
    "Const", "Symbol", "Sum", "Product", "Power", "Derivative", "Func",
    "Expression", "ParseError", "UnknownFunctionError",
    "FUNCTIONS", "parse", "to_text", "symbols",
]

FUNCTIONS = ("sin", "cos", "exp")


@dataclass(frozen=True)
class Const:
    value: Fraction

    def __post_init__(self):
        if not isinstance(self.value, Fraction):
            object.__setattr__(self, "value", Fraction(self.value))

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Symbol:
    name: str

    def __post_init__(self):
        if not self.name:
            raise ValueError("symbol name must be nonempty")

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Sum:
    terms: tuple

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Product:
    factors: tuple

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Power:
    base: "Expression"
    exponent: Fraction

    def __post_init__(self):
        if isinstance(self.exponent, float):
            raise TypeError("power exponents must be exact rationals")
        if not isinstance(self.exponent, Fraction):
            object.__setattr__(self, "exponent", Fraction(self.exponent))

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Derivative:
    expr: "Expression"
    var: str

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Func:
    name: str
    arg: "Expression"

    def __post_init__(self):
        if self.name not in FUNCTIONS:
            raise UnknownFunctionError(f"unknown function {self.name!r}", 0)

    def __str__(self):
        return to_text(self)


Expression = Union[Const, Symbol, Sum, Product, Power, Derivative, Func]


class ParseError(ValueError):
    """Syntax error; ``pos`` is the 0-based character offset."""

    def __init__(self, message, pos):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos


class UnknownFunctionError(ParseError):
    pass


_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d*)?|\.\d+)"
    r"|(?P<name>[A-Za-z_Ͱ-Ͽ][A-Za-z0-9_Ͱ-Ͽ]*)"
    r"|(?P<op>[-+*/^(),]))"
)


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            bad = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ParseError(f"unexpected character {text[bad]!r}", bad)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, val, pos = self.tok
        if val != value or kind == "end":
            found = "end of input" if kind == "end" else repr(val)
            raise ParseError(f"expected {value!r}, found {found}", pos)
        return self.advance()

    def parse(self):
        node = self.expr()
        kind, val, pos = self.tok
        if kind != "end":
            raise ParseError(f"unexpected token {val!r}", pos)
        return node

    def expr(self):
        terms = [self.term()]
        while self.tok[0] == "op" and self.tok[1] in "+-":
            op = self.advance()[1]
            rhs = self.term()
            terms.append(rhs if op == "+" else _negate(rhs))
        return terms[0] if len(terms) == 1 else Sum(tuple(terms))

    def term(self):
        factors = [self.unary()]
        while self.tok[0] == "op" and self.tok[1] in "*/":
            op = self.advance()[1]
            rhs = self.unary()
            if op == "*":
                factors.append(rhs)
            elif len(factors) == 1 and isinstance(factors[0], Const) and isinstance(rhs, Const):
                if rhs.value == 0:
                    raise ParseError("division by zero constant", self.tok[2])
                factors[0] = Const(factors[0].value / rhs.value)
            else:
                factors.append(Power(rhs, Fraction(-1)))
        return factors[0] if len(factors) == 1 else Product(tuple(factors))

    def unary(self):
        if self.tok[0] == "op" and self.tok[1] in "+-":
            op = self.advance()[1]
            operand = self.unary()
            return operand if op == "+" else _negate(operand)
        return self.power()

    def power(self):
        base = self.atom()
        if self.tok[0] == "op" and self.tok[1] == "^":
            self.advance()
            pos = self.tok[2]
            exponent = _fold_constant(self.unary())
            if exponent is None:
                raise ParseError("exponent must be a rational constant", pos)
            return Power(base, exponent)
        return base

    def atom(self):
        kind, val, pos = self.tok
        if kind == "num":
            self.advance()
            return Const(Fraction(val))
        if kind == "name":
            self.advance()
            if self.tok[1] != "(" or self.tok[0] != "op":
                return Symbol(val)
            if val == "d":
                self.advance()
                inner = self.expr()
                self.expect(",")
                vkind, var, vpos = self.tok
                if vkind != "name":
                    raise ParseError("derivative variable must be a symbol", vpos)
                self.advance()
                self.expect(")")
                return Derivative(inner, var)
            if val not in FUNCTIONS:
                raise UnknownFunctionError(f"unknown function {val!r}", pos)
            self.advance()
            arg = self.expr()
            self.expect(")")
            return Func(val, arg)
        if kind == "op" and val == "(":
            self.advance()
            inner = self.expr()
            self.expect(")")
            return inner
        found = "end of input" if kind == "end" else repr(val)
        raise ParseError(f"unexpected {found}", pos)


def _negate(node):
    if isinstance(node, Const):
        return Const(-node.value)
    return Product((Const(-1), node))


def _fold_constant(node):
    """Exact value of a constant-only subtree, or None."""
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Sum):
        vals = [_fold_constant(t) for t in node.terms]
        return None if None in vals else sum(vals, Fraction(0))
    if isinstance(node, Product):
        out = Fraction(1)
        for f in node.factors:
            v = _fold_constant(f)
            if v is None:
                return None
            out *= v
        return out
    if isinstance(node, Power):
        v = _fold_constant(node.base)
        if v is None or node.exponent.denominator != 1:
            return None
        if v == 0 and node.exponent < 0:
            return None
        return v ** int(node.exponent)
    return None


def parse(text: str) -> Expression:
    """Parse ``text`` into an expression tree."""
    return _Parser(text).parse()


def _rational_text(q):
    if q.denominator == 1 and q >= 0:
        return str(q.numerator)
    return f"({q.numerator}/{q.denominator})" if q.denominator != 1 else f"({q.numerator})"


def _atomic_text(node):
    if isinstance(node, (Symbol, Func, Derivative)):
        return to_text(node)
    if isinstance(node, Const):
        return to_text(node)
    return f"({to_text(node)})"


def to_text(node: Expression) -> str:
    """Canonical parseable text for ``node``."""
    if isinstance(node, Const):
        return _rational_text(node.value)
    if isinstance(node, Symbol):
        return node.name
    if isinstance(node, Sum):
        parts = [f"({to_text(t)})" if isinstance(t, Sum) else to_text(t) for t in node.terms]
        return " + ".join(parts)
    if isinstance(node, Product):
        parts = [f"({to_text(f)})" if isinstance(f, (Sum, Product)) else to_text(f)
                 for f in node.factors]
        return "*".join(parts)
    if isinstance(node, Power):
        return f"{_atomic_text(node.base)}^{_rational_text(node.exponent)}"
    if isinstance(node, Derivative):
        return f"d({to_text(node.expr)}, {node.var})"
    if isinstance(node, Func):
        return f"{node.name}({to_text(node.arg)})"
    raise TypeError(f"not an expression node: {node!r}")


def symbols(node: Expression) -> set:
    """Names of all symbols occurring in ``node`` (derivative variables included)."""
    if isinstance(node, Symbol):
        return {node.name}
    if isinstance(node, Const):
        return set()
    if isinstance(node, Sum):
        return set().union(*(symbols(t) for t in node.terms))
    if isinstance(node, Product):
        return set().union(*(symbols(f) for f in node.factors))
    if isinstance(node, Power):
        return symbols(node.base)
    if isinstance(node, Derivative):
        return symbols(node.expr) | {node.var}
    if isinstance(node, Func):
        return symbols(node.arg)
    raise TypeError(f"not an expression node: {node!r}")

"""
Text front end for operators, recurrences and rational sequences.

    expr   :: term [ ('+' | '-') term ]*
    term   :: factor [ '*' factor ]*
    factor :: '-' factor | atom [ '^' uint ]
    atom   :: uint | uint '/' uint | z | x | D | T | Delta | '(' expr ')'

Products are expanded at parse time with the commutation rule of the ring the
expression lives in (D z = z D + 1, Delta x = x Delta + Delta + 1).
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from pyparsing import (
    Combine,
    Forward,
    Keyword,
    Literal,
    Optional,
    ParseBaseException,
    ParseFatalException,
    Suppress,
    Word,
    ZeroOrMore,
    nums,
)

from geops.arith import Recurrence
from geops.errors import ParseError
from geops.kernel import Poly, as_rat
from geops.opalg import DifferenceOp, DiffOp, ThetaOp, describe, theta_form

logger = logging.getLogger(__name__)

SOURCE_KINDS = ("diff-op", "theta-op", "difference-op", "recurrence", "rational-sequence-spec")

_DIFF_NAMES = {"z", "D", "T"}
_DIFFERENCE_NAMES = {"x", "Delta"}


@dataclass(frozen=True)
class SourceExpr:
    text: str
    kind: str

    def __post_init__(self):
        if self.kind not in SOURCE_KINDS:
            raise ValueError(f"unknown source kind {self.kind!r}")


def _rational(s, loc, tokens):
    num, den = tokens[0].split("/")
    if int(den) == 0:
        raise ParseFatalException(s, loc, "zero denominator")
    return Fraction(int(num), int(den))


def _power(tokens):
    return tokens[0] if len(tokens) == 1 else tokens[0] ** int(tokens[1])


def _fold_sum(tokens):
    acc = tokens[0]
    for k in range(1, len(tokens), 2):
        acc = acc + tokens[k + 1] if tokens[k] == "+" else acc - tokens[k + 1]
    return acc


def _fold_product(tokens):
    acc = tokens[0]
    for v in tokens[1:]:
        acc = acc * v
    return acc


class _Grammar:
    """
    Builds the expression grammar around a table of atom values; every name
    that gets used is recorded so the caller can pick the target ring.
    """

    def __init__(self, atoms: dict, extra_atom=None):
        self.used: set = set()
        expr = Forward()
        uint = Word(nums)
        rational = Combine(Word(nums) + "/" + Word(nums)).set_parse_action(_rational)
        integer = uint.copy().set_parse_action(lambda t: Fraction(int(t[0])))

        names = None
        for name in sorted(atoms, key=len, reverse=True):
            kw = Keyword(name).set_parse_action(self._atom_action(name, atoms[name]))
            names = kw if names is None else names | kw

        lpar, rpar = Suppress("("), Suppress(")")
        alternatives = rational | integer
        if extra_atom is not None:
            alternatives = alternatives | extra_atom
        if names is not None:
            alternatives = alternatives | names
        atom = alternatives | (lpar + expr + rpar)

        factor = Forward()
        # the exponent is an optional suffix so a parenthesized atom is parsed once
        power = (atom + Optional(Suppress("^") + uint)).set_parse_action(_power)
        negation = (Suppress("-") + factor).set_parse_action(lambda t: -t[0])
        factor <<= negation | power
        term = (factor + ZeroOrMore(Suppress("*") + factor)).set_parse_action(_fold_product)
        expr <<= (term + ZeroOrMore((Literal("+") | Literal("-")) + term)).set_parse_action(_fold_sum)
        self.expr = expr

    def _atom_action(self, name, value):
        def action(_s, _loc, _t):
            self.used.add(name)
            return value
        return action

    def parse(self, text: str):
        try:
            return self.expr.parse_string(text, parse_all=True)[0]
        except ParseBaseException as e:
            raise ParseError(f"syntax error: {e.msg}", text, e.loc) from None
        except TypeError as e:
            raise ParseError(f"invalid expression: {e}", text, 0) from None


def _operator_atoms() -> dict:
    z, d = DiffOp.z(), DiffOp.d()
    return {
        "z": z,
        "D": d,
        "T": z * d,
        "x": DifferenceOp.x(),
        "Delta": DifferenceOp.delta(),
    }


def parse_operator(text: str) -> Union[DiffOp, ThetaOp, DifferenceOp]:
    grammar = _Grammar(_operator_atoms())
    value = grammar.parse(text)
    used = grammar.used
    if used & _DIFF_NAMES and used & _DIFFERENCE_NAMES:
        raise ParseError("expression mixes the differential (z, D, T) and difference (x, Delta) rings", text, 0)
    if isinstance(value, Fraction):
        value = DifferenceOp.const(value) if used & _DIFFERENCE_NAMES else DiffOp.const(value)
    if isinstance(value, DifferenceOp):
        return value.normalized()
    op = value.normalized()
    if "T" in used and "D" not in used:
        return theta_form(op)[0].normalized()
    return op


def parse_diffop(text: str) -> DiffOp:
    """Like parse_operator, but always returns an element of the Weyl algebra."""
    op = parse_operator(text)
    if isinstance(op, ThetaOp):
        return op.to_diffop().normalized()
    if isinstance(op, DifferenceOp):
        raise ParseError("expected a differential operator", text, 0)
    return op


# ---------------------------------------------------------------------------
# Recurrences
# ---------------------------------------------------------------------------
class _Linear:
    """sum over shifts of P(n) a(n+shift), plus a polynomial part under key None."""

    def __init__(self, parts: dict):
        self.parts = {k: v for k, v in parts.items() if not v.is_zero()}

    @classmethod
    def lift(cls, other) -> "_Linear":
        if isinstance(other, _Linear):
            return other
        return cls({None: Poly.const(as_rat(other))})

    def is_scalar(self) -> bool:
        return set(self.parts) <= {None}

    def __add__(self, other):
        other = _Linear.lift(other)
        out = dict(self.parts)
        for k, v in other.parts.items():
            out[k] = out.get(k, Poly()) + v
        return _Linear(out)

    __radd__ = __add__

    def __neg__(self):
        return _Linear({k: -v for k, v in self.parts.items()})

    def __sub__(self, other):
        return self + (-_Linear.lift(other))

    def __rsub__(self, other):
        return _Linear.lift(other) - self

    def __mul__(self, other):
        other = _Linear.lift(other)
        if other.is_scalar():
            scalar, target = other.parts.get(None, Poly()), self
        elif self.is_scalar():
            scalar, target = self.parts.get(None, Poly()), other
        else:
            raise TypeError("recurrence terms must be linear in a(.)")
        return _Linear({k: scalar * v for k, v in target.parts.items()})

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not self.is_scalar():
            raise TypeError("powers of a(.) are not linear")
        return _Linear({None: self.parts.get(None, Poly()) ** k})


def parse_recurrence(text: str) -> Recurrence:
    if text.count("=") != 1:
        raise ParseError("a recurrence needs exactly one '='", text, max(text.find("="), 0))
    lhs_text, rhs_text = text.split("=")

    signed = (Literal("+") | Literal("-")) + Word(nums)
    term_ref = (
        Suppress(Keyword("a")) + Suppress("(") + Suppress(Keyword("n"))
        + ZeroOrMore(signed) + Suppress(")")
    ).set_parse_action(_shift_ref)
    grammar = _Grammar({"n": _Linear({None: Poly.x()})}, extra_atom=term_ref)

    lhs = _Linear.lift(grammar.parse(lhs_text))
    try:
        rhs = _Linear.lift(_Grammar({"n": _Linear({None: Poly.x()})}, extra_atom=term_ref).parse(rhs_text))
    except ParseError as e:
        raise ParseError(str(e).splitlines()[0], text, len(lhs_text) + 1 + max(e.position, 0)) from None
    rel = lhs - rhs
    if not rel.is_scalar() and rel.parts.get(None) is not None:
        raise ParseError("inhomogeneous recurrence", text, 0)
    shifts = {k: v for k, v in rel.parts.items() if k is not None}
    if not shifts:
        raise ParseError("empty relation", text, 0)
    low = min(shifts)
    coeffs = [Poly()] * (max(shifts) - low + 1)
    for s, p in shifts.items():
        coeffs[s - low] = p.shift(-low)
    rec = Recurrence(tuple(coeffs))
    if rec.order == 0:
        logger.warning("order-0 relation %r: it only pins terms to zero", text)
    return rec


def _shift_ref(tokens):
    k = 0
    for i in range(0, len(tokens), 2):
        k += int(tokens[i + 1]) if tokens[i] == "+" else -int(tokens[i + 1])
    return _Linear({k: Poly.const(1)})


def parse_rationals(text: str) -> list[Fraction]:
    """Comma- or whitespace-separated rationals."""
    items = [t for t in text.replace(",", " ").split() if t]
    try:
        return [Fraction(t) for t in items]
    except (ValueError, ZeroDivisionError) as e:
        raise ParseError(f"bad rational list: {e}", text, 0) from None


def parse_rational(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise ParseError("expected a rational p/q", text, 0) from None


def parse_source(src: SourceExpr):
    if src.kind == "recurrence":
        return parse_recurrence(src.text)
    if src.kind == "rational-sequence-spec":
        return parse_rationals(src.text)
    op = parse_operator(src.text)
    expected = {"diff-op": DiffOp, "theta-op": ThetaOp, "difference-op": DifferenceOp}[src.kind]
    if src.kind == "diff-op" and isinstance(op, ThetaOp):
        op = op.to_diffop().normalized()
    if not isinstance(op, expected):
        raise ParseError(f"expected a {src.kind}, got {type(op).__name__}", src.text, 0)
    return op


def serialize(value) -> str:
    if isinstance(value, Recurrence):
        return value.to_str()
    return describe(value)

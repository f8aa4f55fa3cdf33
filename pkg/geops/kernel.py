"""
Exact rational arithmetic substrate: dense univariate polynomials over Q,
normalized rational functions, truncated power series helpers.

Rationals are plain `fractions.Fraction` values (aliased as `Rat`).
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

import sympy

from geops.errors import PreconditionError

logger = logging.getLogger(__name__)

Rat = Fraction
Scalar = Union[int, Fraction]


def as_rat(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        return Fraction(value.strip())
    return Fraction(value)


def rat_str(value: Fraction) -> str:
    """Deterministic "p/q" rendering; integers render without a denominator."""
    value = as_rat(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def den_lcm(values: Iterable[Scalar]) -> int:
    values = list(values)
    if not values:
        raise PreconditionError("den_lcm needs a nonempty list")
    d = 1
    for v in values:
        d = math.lcm(d, as_rat(v).denominator)
    return d


# ---------------------------------------------------------------------------
# Polynomials
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class Poly:
    """Dense polynomial over Q; coeffs[k] is the coefficient of X^k."""

    coeffs: tuple = ()

    def __post_init__(self):
        cs = [as_rat(c) for c in self.coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    # -- constructors -------------------------------------------------------
    @classmethod
    def const(cls, c: Scalar) -> "Poly":
        return cls((c,))

    @classmethod
    def monomial(cls, k: int, c: Scalar = 1) -> "Poly":
        return cls((0,) * k + (c,))

    @classmethod
    def x(cls) -> "Poly":
        return cls((0, 1))

    @classmethod
    def linear(cls, a: Scalar) -> "Poly":
        """X + a"""
        return cls((a, 1))

    # -- basic queries ------------------------------------------------------
    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_const(self) -> bool:
        return len(self.coeffs) <= 1

    @property
    def lead(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def coeff(self, k: int) -> Fraction:
        if 0 <= k < len(self.coeffs):
            return self.coeffs[k]
        return Fraction(0)

    def valuation(self) -> int:
        """Order of vanishing at X = 0 (-1 for the zero polynomial)."""
        for k, c in enumerate(self.coeffs):
            if c != 0:
                return k
        return -1

    # -- ring operations ----------------------------------------------------
    def __add__(self, other) -> "Poly":
        other = _lift(other)
        if other is NotImplemented:
            return NotImplemented
        n = max(len(self.coeffs), len(other.coeffs))
        return Poly(tuple(self.coeff(k) + other.coeff(k) for k in range(n)))

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly(tuple(-c for c in self.coeffs))

    def __sub__(self, other) -> "Poly":
        other = _lift(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "Poly":
        return _lift(other) - self

    def __mul__(self, other) -> "Poly":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, Poly):
            return NotImplemented
        if self.is_zero() or other.is_zero():
            return Poly()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return Poly(tuple(out))

    def __rmul__(self, other) -> "Poly":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def scale(self, c: Scalar) -> "Poly":
        c = as_rat(c)
        return Poly(tuple(c * a for a in self.coeffs))

    def __pow__(self, k: int) -> "Poly":
        result = Poly.const(1)
        base = self
        while k > 0:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __call__(self, x):
        acc = 0 * x if not isinstance(x, (int, Fraction)) else Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __divmod__(self, other: "Poly"):
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        q = [Fraction(0)] * max(0, len(rem) - len(other.coeffs) + 1)
        lead = other.lead
        dq = other.degree
        for k in range(len(rem) - 1, dq - 1, -1):
            c = rem[k] / lead
            if c == 0:
                continue
            q[k - dq] = c
            for j, b in enumerate(other.coeffs):
                rem[k - dq + j] -= c * b
        return Poly(tuple(q)), Poly(tuple(rem[:dq] if dq > 0 else ()))

    def __floordiv__(self, other: "Poly") -> "Poly":
        return divmod(self, other)[0]

    def __mod__(self, other: "Poly") -> "Poly":
        return divmod(self, other)[1]

    def divides(self, other: "Poly") -> bool:
        return (other % self).is_zero()

    # -- calculus / substitution -------------------------------------------
    def derivative(self) -> "Poly":
        return Poly(tuple(k * c for k, c in enumerate(self.coeffs))[1:])

    def compose(self, g: "Poly") -> "Poly":
        acc = Poly()
        for c in reversed(self.coeffs):
            acc = acc * g + c
        return acc

    def shift(self, a: Scalar) -> "Poly":
        """p(X + a)"""
        return self.compose(Poly.linear(a))

    def reflect(self) -> "Poly":
        """p(-X)"""
        return Poly(tuple(c if k % 2 == 0 else -c for k, c in enumerate(self.coeffs)))

    def substitute_power(self, u: int) -> "Poly":
        """p(X^u)"""
        out = [Fraction(0)] * (self.degree * u + 1 if self.coeffs else 0)
        for k, c in enumerate(self.coeffs):
            out[k * u] = c
        return Poly(tuple(out))

    # -- normalization ------------------------------------------------------
    def monic(self) -> "Poly":
        if self.is_zero():
            return self
        return self.scale(1 / self.lead)

    def content(self) -> Fraction:
        """Positive rational c with self / c primitive integral."""
        if self.is_zero():
            return Fraction(0)
        return rat_content(self.coeffs)

    def primitive(self) -> "Poly":
        if self.is_zero():
            return self
        return self.scale(1 / self.content())

    @staticmethod
    def gcd(a: "Poly", b: "Poly") -> "Poly":
        while not b.is_zero():
            a, b = b, a % b
        return a.monic()

    # -- rendering ----------------------------------------------------------
    def to_str(self, var: str = "X") -> str:
        if self.is_zero():
            return "0"
        parts = []
        for k in range(self.degree, -1, -1):
            c = self.coeffs[k]
            if c == 0:
                continue
            parts.append(_term_str(c, var, k))
        text = " + ".join(parts)
        return text.replace("+ -", "- ")

    def __str__(self) -> str:
        return self.to_str()

    def to_sympy(self, gen: sympy.Symbol) -> sympy.Poly:
        return sympy.Poly(
            [sympy.Rational(c.numerator, c.denominator) for c in reversed(self.coeffs)] or [0],
            gen,
            domain=sympy.QQ,
        )

    @classmethod
    def from_sympy(cls, p: sympy.Poly) -> "Poly":
        coeffs = [Fraction(int(c.p), int(c.q)) for c in reversed(p.all_coeffs())]
        return cls(tuple(coeffs))


def _lift(other):
    if isinstance(other, Poly):
        return other
    if isinstance(other, (int, Fraction)):
        return Poly.const(other)
    return NotImplemented


def _term_str(c: Fraction, var: str, k: int) -> str:
    if k == 0:
        return rat_str(c)
    mono = var if k == 1 else f"{var}^{k}"
    if c == 1:
        return mono
    if c == -1:
        return f"-{mono}"
    return f"{rat_str(c)}*{mono}"


def rat_content(values: Iterable[Scalar]) -> Fraction:
    """gcd of numerators over lcm of denominators, over the nonzero values."""
    nums = 0
    dens = 1
    for v in values:
        v = as_rat(v)
        if v == 0:
            continue
        nums = math.gcd(nums, v.numerator)
        dens = math.lcm(dens, v.denominator)
    if nums == 0:
        return Fraction(0)
    return Fraction(nums, dens)


# ---------------------------------------------------------------------------
# Rational functions
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class RatFun:
    num: Poly
    den: Poly = Poly((1,))

    def __post_init__(self):
        num, den = self.num, self.den
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        if num.is_zero():
            num, den = Poly(), Poly.const(1)
        else:
            g = Poly.gcd(num, den)
            if g.degree > 0:
                num, den = num // g, den // g
            lc = den.lead
            num, den = num.scale(1 / lc), den.scale(1 / lc)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    @classmethod
    def of(cls, value) -> "RatFun":
        if isinstance(value, RatFun):
            return value
        if isinstance(value, Poly):
            return cls(value)
        return cls(Poly.const(value))

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_poly(self) -> bool:
        return self.den.degree == 0

    def __add__(self, other) -> "RatFun":
        other = RatFun.of(other)
        return RatFun(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self) -> "RatFun":
        return RatFun(-self.num, self.den)

    def __sub__(self, other) -> "RatFun":
        return self + (-RatFun.of(other))

    def __mul__(self, other) -> "RatFun":
        other = RatFun.of(other)
        return RatFun(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "RatFun":
        other = RatFun.of(other)
        if other.is_zero():
            raise ZeroDivisionError("division by the zero rational function")
        return RatFun(self.num * other.den, self.den * other.num)

    def derivative(self) -> "RatFun":
        return RatFun(
            self.num.derivative() * self.den - self.num * self.den.derivative(),
            self.den * self.den,
        )

    def __str__(self) -> str:
        if self.is_poly():
            return self.num.to_str("z")
        return f"({self.num.to_str('z')})/({self.den.to_str('z')})"


# ---------------------------------------------------------------------------
# Roots and factorization
# ---------------------------------------------------------------------------
def rational_roots(p: Poly) -> tuple[dict[Fraction, int], Poly]:
    """
    All rational roots of p with multiplicity, plus the monic factor left
    after deflating them out (Poly.const(1) when p splits over Q).
    """
    if p.is_zero():
        raise PreconditionError("rational_roots of the zero polynomial")
    roots: dict[Fraction, int] = {}
    rest = p.monic()
    v = rest.valuation()
    if v > 0:
        roots[Fraction(0)] = v
        rest = Poly(rest.coeffs[v:])
    if rest.degree <= 0:
        return roots, Poly.const(1)

    integral = rest.primitive()
    a0 = abs(integral.coeffs[0].numerator)
    an = abs(integral.lead.numerator)
    candidates = sorted(
        {Fraction(s * d, e) for d in sympy.divisors(a0) for e in sympy.divisors(an) for s in (1, -1)}
    )
    for r in candidates:
        while rest.degree > 0 and rest(r) == 0:
            roots[r] = roots.get(r, 0) + 1
            rest = rest // Poly.linear(-r)
    return roots, rest.monic()


def factor_list(p: Poly) -> list[tuple[Poly, int]]:
    """Monic irreducible factors of p over Q with multiplicities."""
    if p.degree <= 0:
        return []
    z = sympy.Symbol("z")
    _, factors = p.to_sympy(z).factor_list()
    out = [(Poly.from_sympy(f).monic(), int(m)) for f, m in factors]
    return sorted(out, key=lambda fm: (fm[0].degree, fm[0].coeffs))


def valuation_at(p: Poly, factor: Poly) -> int:
    """Multiplicity of an irreducible factor in p (-1 for p = 0)."""
    if p.is_zero():
        return -1
    k = 0
    while True:
        q, r = divmod(p, factor)
        if not r.is_zero():
            return k
        p, k = q, k + 1


# ---------------------------------------------------------------------------
# Pochhammer symbols and falling factorials
# ---------------------------------------------------------------------------
def pochhammer(a: Scalar, n: int) -> Fraction:
    """Rising factorial (a)_n."""
    out = Fraction(1)
    a = as_rat(a)
    for k in range(n):
        out *= a + k
    return out


def falling_poly(shift: Scalar, i: int) -> Poly:
    """(X + shift)(X + shift - 1)...(X + shift - i + 1) as a polynomial in X."""
    out = Poly.const(1)
    for k in range(i):
        out = out * Poly.linear(as_rat(shift) - k)
    return out


def rising_poly(shift: Scalar, i: int) -> Poly:
    """(X + shift)(X + shift + 1)...(X + shift + i - 1)"""
    out = Poly.const(1)
    for k in range(i):
        out = out * Poly.linear(as_rat(shift) + k)
    return out


# ---------------------------------------------------------------------------
# Truncated power series (coefficient lists, index = power)
# ---------------------------------------------------------------------------
Series = list


def series_mul(a: Sequence[Scalar], b: Sequence[Scalar], N: int) -> list[Fraction]:
    out = [Fraction(0)] * (N + 1)
    for i, x in enumerate(a[: N + 1]):
        if x == 0:
            continue
        for j, y in enumerate(b[: N + 1 - i]):
            out[i + j] += x * y
    return out


def poly_compose_truncated(f: Sequence[Scalar], g: Sequence[Scalar], N: int) -> list[Fraction]:
    """Taylor coefficients of f(g(z)) through z^N; g must vanish at 0."""
    if g and as_rat(g[0]) != 0:
        raise PreconditionError("composition needs an inner series with zero constant term")
    g = [as_rat(c) for c in g[: N + 1]] + [Fraction(0)] * max(0, N + 1 - len(g))
    acc = [Fraction(0)] * (N + 1)
    for c in reversed(list(f[: N + 1])):
        acc = series_mul(acc, g, N)
        acc[0] += as_rat(c)
    return acc


def exp_series(N: int, a: Scalar = 1) -> list[Fraction]:
    """e^{a z}"""
    a = as_rat(a)
    return [a**n / math.factorial(n) for n in range(N + 1)]


def log_inverse_one_minus(N: int) -> list[Fraction]:
    """log(1/(1-z)) = sum z^n / n"""
    return [Fraction(0)] + [Fraction(1, n) for n in range(1, N + 1)]


def one_minus_exp_neg(N: int) -> list[Fraction]:
    """1 - e^{-w}, the compositional inverse of log(1/(1-z))"""
    return [Fraction(0)] + [-Fraction((-1) ** n, math.factorial(n)) for n in range(1, N + 1)]

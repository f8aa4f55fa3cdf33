"""
Truncated Puiseux-log series with coefficients over formal Gamma seeds.

A series is a finite set of branches z^beta * sum_{n<=N} sum_k c[n][k] z^{+-n} log^k z,
one branch per exponent class modulo Z.  Gamma values and their derivatives
never get evaluated: they are carried as opaque `Seed` symbols inside
`SeedCombo` linear combinations.
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Union

from geops.kernel import Scalar, as_rat, rat_str

logger = logging.getLogger(__name__)

SEED_KINDS = ("gamma", "rgamma", "rho")


@dataclass(frozen=True, order=True)
class Seed:
    """
    gamma  : Gamma^{(order)}(point)
    rgamma : 1 / Gamma(point)
    rho    : rho_{0,order} attached to exponent `point` (basis of a rho-table)
    """

    kind: str
    point: Fraction
    order: int = 0

    def __post_init__(self):
        if self.kind not in SEED_KINDS:
            raise ValueError(f"unknown seed kind {self.kind!r}")
        object.__setattr__(self, "point", as_rat(self.point))

    def __str__(self) -> str:
        p = rat_str(self.point)
        if self.kind == "rgamma":
            return f"1/Gamma({p})"
        if self.kind == "rho":
            return f"rho[0,{self.order}]({p})"
        if self.order == 0:
            return f"Gamma({p})"
        if self.order == 1:
            return f"Gamma'({p})"
        return f"Gamma^({self.order})({p})"

    def rational_value(self):
        """The exact value when the seed is a rational number, else None."""
        if self.order != 0 or self.kind == "rho":
            return None
        p = self.point
        if p.denominator == 1 and p > 0:
            f = Fraction(math.factorial(p.numerator - 1))
            return f if self.kind == "gamma" else 1 / f
        return None


def gamma_seed(point: Scalar, order: int = 0) -> "SeedCombo":
    return SeedCombo.of_seed(Seed("gamma", as_rat(point), order))


def rgamma_seed(point: Scalar) -> "SeedCombo":
    return SeedCombo.of_seed(Seed("rgamma", as_rat(point), 0))


@dataclass(frozen=True)
class SeedCombo:
    """rational + sum of c_s * seed_s, no zero entries stored."""

    rational: Fraction = Fraction(0)
    terms: tuple = ()

    def __post_init__(self):
        rational = as_rat(self.rational)
        merged: dict[Seed, Fraction] = {}
        for seed, c in self.terms:
            c = as_rat(c)
            value = seed.rational_value()
            if value is not None:
                rational += c * value
                continue
            merged[seed] = merged.get(seed, Fraction(0)) + c
        object.__setattr__(self, "rational", rational)
        object.__setattr__(
            self, "terms", tuple(sorted((s, c) for s, c in merged.items() if c != 0))
        )

    @classmethod
    def of_seed(cls, seed: Seed, c: Scalar = 1) -> "SeedCombo":
        return cls(Fraction(0), ((seed, as_rat(c)),))

    @classmethod
    def lift(cls, value) -> "SeedCombo":
        if isinstance(value, SeedCombo):
            return value
        return cls(as_rat(value))

    def is_rational(self) -> bool:
        return not self.terms

    def is_zero(self) -> bool:
        return self.rational == 0 and not self.terms

    def seeds(self) -> dict:
        return dict(self.terms)

    def simplify(self):
        """Collapse to a plain Fraction when no seed survives."""
        return self.rational if self.is_rational() else self

    def __add__(self, other) -> "SeedCombo":
        if not isinstance(other, (SeedCombo, int, Fraction)):
            return NotImplemented
        other = SeedCombo.lift(other)
        return SeedCombo(self.rational + other.rational, self.terms + other.terms)

    __radd__ = __add__

    def __neg__(self) -> "SeedCombo":
        return SeedCombo(-self.rational, tuple((s, -c) for s, c in self.terms))

    def __sub__(self, other) -> "SeedCombo":
        if not isinstance(other, (SeedCombo, int, Fraction)):
            return NotImplemented
        return self + (-SeedCombo.lift(other))

    def __rsub__(self, other) -> "SeedCombo":
        return SeedCombo.lift(other) - self

    def __mul__(self, other) -> "SeedCombo":
        if isinstance(other, SeedCombo):
            if other.is_rational():
                other = other.rational
            elif self.is_rational():
                return other * self.rational
            else:
                raise TypeError("seed combinations are linear; products of seeds are not represented")
        if not isinstance(other, (int, Fraction)):
            return NotImplemented
        c = as_rat(other)
        return SeedCombo(self.rational * c, tuple((s, v * c) for s, v in self.terms))

    __rmul__ = __mul__

    def __truediv__(self, other) -> "SeedCombo":
        return self * (1 / as_rat(other))

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            return self.is_rational() and self.rational == other
        if isinstance(other, SeedCombo):
            return self.rational == other.rational and self.terms == other.terms
        return NotImplemented

    def __hash__(self) -> int:
        if self.is_rational():
            return hash(self.rational)
        return hash((self.rational, self.terms))

    def ratio_to(self, other: "SeedCombo"):
        """c with self == c * other, or None if not proportional."""
        other = SeedCombo.lift(other)
        if other.is_zero():
            return Fraction(0) if self.is_zero() else None
        if other.rational != 0:
            c = self.rational / other.rational
        else:
            seed, v = other.terms[0]
            c = self.seeds().get(seed, Fraction(0)) / v
        return c if self == other * c else None

    def __str__(self) -> str:
        parts = []
        if self.rational != 0 or not self.terms:
            parts.append(rat_str(self.rational))
        for seed, c in self.terms:
            if c == 1:
                parts.append(str(seed))
            elif c == -1:
                parts.append(f"-{seed}")
            else:
                parts.append(f"{rat_str(c)}*{seed}")
        return " + ".join(parts).replace("+ -", "- ")


Coeff = Union[Fraction, SeedCombo]


def coeff_str(c: Coeff) -> str:
    return str(c) if isinstance(c, SeedCombo) else rat_str(c)


def _clean(c) -> Coeff:
    if isinstance(c, SeedCombo):
        return c.simplify()
    return as_rat(c)


def exponent_class(beta: Fraction) -> Fraction:
    """Representative of beta + Z in [0, 1)."""
    return beta - math.floor(beta)


# ---------------------------------------------------------------------------
# Branches and series
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class Branch:
    """z^{base + direction*n} log^k z with coefficient rows[n][k], n = 0..order."""

    base: Fraction
    rows: tuple

    def __post_init__(self):
        width = max((len(r) for r in self.rows), default=1)
        rows = []
        for r in self.rows:
            r = [_clean(c) for c in r] + [Fraction(0)] * (width - len(r))
            rows.append(tuple(r))
        while width > 1 and all(r[width - 1] == 0 for r in rows):
            rows = [r[: width - 1] for r in rows]
            width -= 1
        object.__setattr__(self, "base", as_rat(self.base))
        object.__setattr__(self, "rows", tuple(rows))

    @property
    def order(self) -> int:
        return len(self.rows) - 1

    @property
    def log_degree(self) -> int:
        return max((len(r) for r in self.rows), default=1) - 1

    def coeff(self, n: int, k: int) -> Coeff:
        if 0 <= n < len(self.rows) and 0 <= k < len(self.rows[n]):
            return self.rows[n][k]
        return Fraction(0)

    def is_zero(self) -> bool:
        return all(c == 0 for r in self.rows for c in r)


@dataclass(frozen=True)
class PuiseuxLogSeries:
    """
    direction +1: exponents base + n (expansion at 0)
    direction -1: exponents base - n (expansion at infinity, in powers of 1/z)
    """

    branches: tuple = ()
    direction: int = 1
    variable: str = "z"

    def __post_init__(self):
        if self.direction not in (1, -1):
            raise ValueError("direction must be +1 or -1")
        grouped: dict[Fraction, list] = {}
        for b in self.branches:
            grouped.setdefault(exponent_class(b.base), []).append(b)
        merged = []
        for cls in sorted(grouped):
            group = grouped[cls]
            merged.append(group[0] if len(group) == 1 else _merge(group, self.direction))
        object.__setattr__(self, "branches", tuple(merged))

    # -- constructors -------------------------------------------------------
    @classmethod
    def power_series(cls, coeffs: Iterable[Scalar], base: Scalar = 0, direction: int = 1,
                     variable: str = "z") -> "PuiseuxLogSeries":
        rows = tuple((c,) for c in coeffs)
        return cls((Branch(as_rat(base), rows),), direction, variable)

    @classmethod
    def monomial(cls, beta: Scalar, k: int = 0, order: int = 0, direction: int = 1,
                 c: Coeff = Fraction(1)) -> "PuiseuxLogSeries":
        rows = [(Fraction(0),) * (k + 1) for _ in range(order + 1)]
        first = [Fraction(0)] * (k + 1)
        first[k] = c
        rows[0] = tuple(first)
        return cls((Branch(as_rat(beta), tuple(rows)),), direction)

    # -- queries ------------------------------------------------------------
    def exponent(self, branch: Branch, n: int) -> Fraction:
        return branch.base + self.direction * n

    def terms(self) -> Iterator[tuple[Fraction, int, Coeff]]:
        for b in self.branches:
            for n, row in enumerate(b.rows):
                for k, c in enumerate(row):
                    if c != 0:
                        yield self.exponent(b, n), k, c

    def coefficient(self, exponent: Scalar, k: int = 0) -> Coeff:
        exponent = as_rat(exponent)
        for b in self.branches:
            n = (exponent - b.base) * self.direction
            if n.denominator == 1 and 0 <= n <= b.order:
                return b.coeff(int(n), k)
        return Fraction(0)

    def valid_through(self) -> dict:
        """Per exponent class, the last exponent up to which coefficients are exact."""
        return {exponent_class(b.base): self.exponent(b, b.order) for b in self.branches}

    def is_zero(self) -> bool:
        return all(b.is_zero() for b in self.branches)

    @property
    def log_degree(self) -> int:
        return max((b.log_degree for b in self.branches), default=0)

    # -- linear structure ---------------------------------------------------
    def __add__(self, other: "PuiseuxLogSeries") -> "PuiseuxLogSeries":
        if self.direction != other.direction:
            raise ValueError("cannot add series with different directions")
        return PuiseuxLogSeries(self.branches + other.branches, self.direction, self.variable)

    def __neg__(self) -> "PuiseuxLogSeries":
        return self.scale(-1)

    def __sub__(self, other: "PuiseuxLogSeries") -> "PuiseuxLogSeries":
        return self + (-other)

    def scale(self, c) -> "PuiseuxLogSeries":
        return self.map_coeffs(lambda n, k, v: v * c)

    def map_coeffs(self, fn) -> "PuiseuxLogSeries":
        branches = []
        for b in self.branches:
            rows = tuple(tuple(fn(n, k, v) for k, v in enumerate(r)) for n, r in enumerate(b.rows))
            branches.append(Branch(b.base, rows))
        return PuiseuxLogSeries(tuple(branches), self.direction, self.variable)

    def truncate(self, order: int) -> "PuiseuxLogSeries":
        branches = tuple(Branch(b.base, b.rows[: order + 1]) for b in self.branches)
        return PuiseuxLogSeries(branches, self.direction, self.variable)

    # -- elementary operators ----------------------------------------------
    def mul_z_power(self, j: Scalar) -> "PuiseuxLogSeries":
        j = as_rat(j)
        branches = tuple(Branch(b.base + j, b.rows) for b in self.branches)
        return PuiseuxLogSeries(branches, self.direction, self.variable)

    def theta(self) -> "PuiseuxLogSeries":
        """z d/dz"""
        branches = []
        for b in self.branches:
            rows = []
            for n, r in enumerate(b.rows):
                beta = self.exponent(b, n)
                rows.append(tuple(
                    beta * r[k] + ((k + 1) * r[k + 1] if k + 1 < len(r) else 0)
                    for k in range(len(r))
                ))
            branches.append(Branch(b.base, tuple(rows)))
        return PuiseuxLogSeries(tuple(branches), self.direction, self.variable)

    def derivative(self) -> "PuiseuxLogSeries":
        """d/dz = z^{-1} theta"""
        return self.theta().mul_z_power(-1)

    def log_to_inverse_variable(self) -> "PuiseuxLogSeries":
        """
        Reinterpret a direction +1 series in w as a series in z = 1/w:
        w^beta log^k w  ->  (-1)^k z^{-beta} log^k z.
        """
        if self.direction != 1:
            raise ValueError("expected a series in increasing powers")
        branches = []
        for b in self.branches:
            rows = tuple(tuple(c if k % 2 == 0 else -c for k, c in enumerate(r)) for r in b.rows)
            branches.append(Branch(-b.base, rows))
        return PuiseuxLogSeries(tuple(branches), -1, self.variable)

    def __str__(self) -> str:
        parts = []
        for beta, k, c in self.terms():
            mono = f"{self.variable}^({rat_str(beta)})" if beta != 0 else "1"
            if k:
                mono += f"*log({self.variable})" + (f"^{k}" if k > 1 else "")
            parts.append(f"({coeff_str(c)})*{mono}")
        return " + ".join(parts) if parts else "0"


def _merge(group: list, direction: int) -> Branch:
    """Merge same-class branches onto the extreme base; keep the smallest common validity."""
    if direction == 1:
        base = min(b.base for b in group)
        last = min(b.base + b.order for b in group)
    else:
        base = max(b.base for b in group)
        last = max(b.base - b.order for b in group)
    order = int((last - base) * direction)
    width = max(b.log_degree for b in group) + 1
    acc = [[Fraction(0)] * width for _ in range(order + 1)]
    for b in group:
        offset = int((b.base - base) * direction)
        for n, row in enumerate(b.rows):
            m = n + offset
            if m > order:
                break
            for k, c in enumerate(row):
                if c != 0:
                    acc[m][k] = acc[m][k] + c
    return Branch(base, tuple(tuple(r) for r in acc))


def series_sum(parts: Iterable[PuiseuxLogSeries], direction: int = 1, variable: str = "z") -> PuiseuxLogSeries:
    branches: tuple = ()
    for p in parts:
        branches += p.branches
    return PuiseuxLogSeries(branches, direction, variable)

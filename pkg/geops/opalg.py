"""
Operator rings over Q[z]:

* the Weyl algebra Q[z]<D> with D z = z D + 1 (`DiffOp`),
* its theta = z D presentation (`ThetaOp`),
* the difference ring Q[x]<Delta> with Delta x = x Delta + Delta + 1 (`DifferenceOp`),
* rational-coefficient operators used for Euclidean division (`RatOp`),

and the structural transforms applied to operators: Fourier-Laplace, adjoint,
inversion, exponential twists, ramification and descent.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from sympy.functions.combinatorial.numbers import stirling

from geops.errors import DescentError, PreconditionError
from geops.kernel import Poly, RatFun, Scalar, as_rat, falling_poly, rat_content, rat_str
from geops.series import PuiseuxLogSeries, series_sum

logger = logging.getLogger(__name__)


def _strip_rows(rows: Iterable[Poly]) -> tuple:
    rows = list(rows)
    while rows and rows[-1].is_zero():
        rows.pop()
    return tuple(rows)


def _poly_row_str(p: Poly, var: str) -> str:
    nonzero = [k for k, c in enumerate(p.coeffs) if c != 0]
    text = p.to_str(var)
    return text if len(nonzero) == 1 else f"({text})"


def _render(rows: tuple, var: str, op: str) -> str:
    parts = []
    for i in range(len(rows) - 1, -1, -1):
        p = rows[i]
        if p.is_zero():
            continue
        if i == 0:
            parts.append(p.to_str(var))
            continue
        mono = op if i == 1 else f"{op}^{i}"
        if p.coeffs == (Fraction(1),):
            parts.append(mono)
        elif p.coeffs == (Fraction(-1),):
            parts.append(f"-{mono}")
        else:
            parts.append(f"{_poly_row_str(p, var)}*{mono}")
    if not parts:
        return "0"
    return " + ".join(parts).replace("+ -", "- ")


# ---------------------------------------------------------------------------
# Weyl algebra
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class DiffOp:
    """sum_i rows[i](z) D^i, coefficients on the left."""

    rows: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "rows", _strip_rows(self.rows))

    @classmethod
    def from_terms(cls, terms: dict) -> "DiffOp":
        """{(i, j): a_ij} for a_ij z^j D^i"""
        mu = max((i for i, _ in terms), default=-1)
        grid: dict[int, dict[int, Fraction]] = {}
        for (i, j), c in terms.items():
            row = grid.setdefault(i, {})
            row[j] = row.get(j, Fraction(0)) + as_rat(c)
        rows = []
        for i in range(mu + 1):
            row = grid.get(i, {})
            deg = max(row, default=-1)
            rows.append(Poly(tuple(row.get(j, 0) for j in range(deg + 1))))
        return cls(tuple(rows))

    @classmethod
    def const(cls, c: Scalar) -> "DiffOp":
        return cls((Poly.const(c),))

    @classmethod
    def of_poly(cls, p: Poly) -> "DiffOp":
        return cls((p,))

    @classmethod
    def z(cls) -> "DiffOp":
        return cls((Poly.x(),))

    @classmethod
    def d(cls) -> "DiffOp":
        return cls((Poly(), Poly.const(1)))

    # -- queries ------------------------------------------------------------
    @property
    def order(self) -> int:
        return len(self.rows) - 1

    @property
    def degree(self) -> int:
        return max((r.degree for r in self.rows), default=-1)

    def row(self, i: int) -> Poly:
        return self.rows[i] if 0 <= i < len(self.rows) else Poly()

    def coeff(self, i: int, j: int) -> Fraction:
        return self.row(i).coeff(j)

    @property
    def leading(self) -> Poly:
        return self.rows[-1] if self.rows else Poly()

    def is_zero(self) -> bool:
        return not self.rows

    def terms(self) -> Iterable[tuple[int, int, Fraction]]:
        for i, r in enumerate(self.rows):
            for j, c in enumerate(r.coeffs):
                if c != 0:
                    yield i, j, c

    # -- ring structure -----------------------------------------------------
    def __add__(self, other) -> "DiffOp":
        other = _lift_op(other)
        n = max(len(self.rows), len(other.rows))
        return DiffOp(tuple(self.row(i) + other.row(i) for i in range(n)))

    __radd__ = __add__

    def __neg__(self) -> "DiffOp":
        return DiffOp(tuple(-r for r in self.rows))

    def __sub__(self, other) -> "DiffOp":
        return self + (-_lift_op(other))

    def __rsub__(self, other) -> "DiffOp":
        return _lift_op(other) - self

    def __mul__(self, other) -> "DiffOp":
        if isinstance(other, (int, Fraction)):
            return DiffOp(tuple(r.scale(other) for r in self.rows))
        return mul(self, _lift_op(other))

    def __rmul__(self, other) -> "DiffOp":
        return mul(_lift_op(other), self)

    def __pow__(self, k: int) -> "DiffOp":
        out = DiffOp.const(1)
        for _ in range(k):
            out = mul(out, self)
        return out

    def left_poly(self, p: Poly) -> "DiffOp":
        return DiffOp(tuple(p * r for r in self.rows))

    # -- normalization ------------------------------------------------------
    def normalized(self) -> "DiffOp":
        """Content 1, leading coefficient of the leading row positive."""
        if self.is_zero():
            return self
        c = rat_content(c for r in self.rows for c in r.coeffs)
        if self.leading.lead < 0:
            c = -c
        return DiffOp(tuple(r.scale(1 / c) for r in self.rows))

    def strip_z(self) -> "DiffOp":
        return strip_z(self)

    def to_str(self) -> str:
        return _render(self.rows, "z", "D")

    def __str__(self) -> str:
        return self.to_str()


def _lift_op(other) -> DiffOp:
    if isinstance(other, DiffOp):
        return other
    if isinstance(other, Poly):
        return DiffOp.of_poly(other)
    if isinstance(other, (int, Fraction)):
        return DiffOp.const(other)
    raise TypeError(f"cannot combine DiffOp with {type(other).__name__}")


def _leibniz_rows(a_rows, b_rows, derive, zero):
    """Generic Weyl product sum_{i,k,l} C(i,l) a_i b_k^{(l)} D^{i-l+k}."""
    if not a_rows or not b_rows:
        return []
    out = [zero] * (len(a_rows) + len(b_rows) - 1)
    for k, b in enumerate(b_rows):
        if b.is_zero():
            continue
        derivs = [b]
        for _ in range(len(a_rows) - 1):
            derivs.append(derive(derivs[-1]))
        for i, a in enumerate(a_rows):
            if a.is_zero():
                continue
            for l in range(i + 1):
                bl = derivs[l]
                if bl.is_zero():
                    break
                out[i - l + k] = out[i - l + k] + (a * bl) * math.comb(i, l)
    return out


def mul(A: DiffOp, B: DiffOp) -> DiffOp:
    """Product in the Weyl algebra."""
    return DiffOp(tuple(_leibniz_rows(A.rows, B.rows, Poly.derivative, Poly())))


def strip_z(phi: DiffOp) -> DiffOp:
    """Remove the largest common left power of z."""
    vals = [r.valuation() for r in phi.rows if not r.is_zero()]
    v = min(vals, default=0)
    if v <= 0:
        return phi
    return DiffOp(tuple(Poly(r.coeffs[v:]) if not r.is_zero() else r for r in phi.rows))


def adjoint(phi: DiffOp) -> DiffOp:
    out = DiffOp()
    d = DiffOp.d()
    for i, q in enumerate(phi.rows):
        out = out + (d ** i) * DiffOp.of_poly(q) * ((-1) ** i)
    return out.normalized()


def symmetry(phi: DiffOp) -> DiffOp:
    """z -> -z, D -> -D"""
    rows = []
    for i, q in enumerate(phi.rows):
        r = q.reflect()
        rows.append(r if i % 2 == 0 else -r)
    return DiffOp(tuple(rows)).normalized()


def fourier_laplace(phi: DiffOp, symmetrized: bool = False) -> DiffOp:
    """
    z -> -D, D -> z on every monomial z^j D^i (written (-D)^j z^i).
    The symmetrized variant composes with z -> -z, D -> -D.
    """
    out = DiffOp()
    d = DiffOp.d()
    for i, j, c in phi.terms():
        sign = (-1) ** i if symmetrized else (-1) ** j
        out = out + (d ** j) * DiffOp.of_poly(Poly.monomial(i, c * sign))
    return out.normalized()


def twist_exp(phi: DiffOp, zeta: Scalar) -> DiffOp:
    """D -> D - zeta; maps annihilators of h to annihilators of e^{zeta z} h."""
    zeta = as_rat(zeta)
    rows = [Poly()] * len(phi.rows)
    for i, q in enumerate(phi.rows):
        for l in range(i + 1):
            rows[l] = rows[l] + q.scale(math.comb(i, l) * (-zeta) ** (i - l))
    return DiffOp(tuple(rows)).normalized()


def translate(phi: DiffOp, a: Scalar) -> DiffOp:
    """Annihilator of f(z + a): coefficients Q_i(z + a)."""
    return DiffOp(tuple(q.shift(a) for q in phi.rows))


def invert(phi: DiffOp) -> DiffOp:
    """
    Annihilator of h(1/z): z -> 1/z, D -> -z^2 D, cleared by z^nu and then
    stripped of at most nu common powers of z.
    """
    nu = phi.degree
    inv_d = DiffOp((Poly(), Poly.monomial(2, -1)))
    powers = [DiffOp.const(1)]
    for _ in range(phi.order):
        powers.append(powers[-1] * inv_d)
    out = DiffOp()
    for i, j, c in phi.terms():
        out = out + DiffOp.of_poly(Poly.monomial(nu - j, c)) * powers[i]
    vals = [r.valuation() for r in out.rows if not r.is_zero()]
    v = min(min(vals, default=0), nu)
    if v > 0:
        out = DiffOp(tuple(Poly(r.coeffs[v:]) if not r.is_zero() else r for r in out.rows))
    return out.normalized()


# ---------------------------------------------------------------------------
# Series action
# ---------------------------------------------------------------------------
def apply(phi: DiffOp, s: PuiseuxLogSeries) -> PuiseuxLogSeries:
    """
    Exact termwise action on a truncated series.  Each branch keeps its row
    count, re-based at the lowest (resp. highest, for series in 1/z) output
    exponent, which keeps only rows whose every contribution is exact.
    """
    parts = []
    deriv = s
    for i, q in enumerate(phi.rows):
        if i > 0:
            deriv = deriv.derivative()
        for j, c in enumerate(q.coeffs):
            if c != 0:
                parts.append(deriv.mul_z_power(j).scale(c))
    if not parts:
        return s.scale(0)
    return series_sum(parts, s.direction, s.variable)


# ---------------------------------------------------------------------------
# theta form
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class ThetaOp:
    """sum_k rows[k](z) theta^k with theta = z D, coefficients on the left."""

    rows: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "rows", _strip_rows(self.rows))

    @property
    def order(self) -> int:
        return len(self.rows) - 1

    def row(self, k: int) -> Poly:
        return self.rows[k] if 0 <= k < len(self.rows) else Poly()

    def z_slices(self) -> dict[int, Poly]:
        """{s: P_s(X)} with the operator equal to sum_s z^s P_s(theta)."""
        out: dict[int, dict[int, Fraction]] = {}
        for k, b in enumerate(self.rows):
            for s, c in enumerate(b.coeffs):
                if c != 0:
                    out.setdefault(s, {})[k] = c
        return {
            s: Poly(tuple(row.get(k, 0) for k in range(max(row) + 1)))
            for s, row in sorted(out.items())
        }

    @classmethod
    def from_slices(cls, slices: dict) -> "ThetaOp":
        grid: dict[int, dict[int, Fraction]] = {}
        for s, P in slices.items():
            for k, c in enumerate(P.coeffs):
                if c != 0:
                    grid.setdefault(k, {})[s] = c
        K = max(grid, default=-1)
        rows = []
        for k in range(K + 1):
            col = grid.get(k, {})
            deg = max(col, default=-1)
            rows.append(Poly(tuple(col.get(s, 0) for s in range(deg + 1))))
        return cls(tuple(rows))

    def normalized(self) -> "ThetaOp":
        if not self.rows:
            return self
        c = rat_content(c for r in self.rows for c in r.coeffs)
        if self.rows[-1].lead < 0:
            c = -c
        return ThetaOp(tuple(r.scale(1 / c) for r in self.rows))

    def strip_z(self) -> "ThetaOp":
        vals = [r.valuation() for r in self.rows if not r.is_zero()]
        v = min(vals, default=0)
        if v <= 0:
            return self
        return ThetaOp(tuple(Poly(r.coeffs[v:]) if not r.is_zero() else r for r in self.rows))

    def to_diffop(self) -> DiffOp:
        """theta^k = sum_i S(k, i) z^i D^i"""
        rows = [Poly()] * len(self.rows)
        for k, b in enumerate(self.rows):
            if b.is_zero():
                continue
            for i in range(k + 1):
                s = int(stirling(k, i))
                if s:
                    rows[i] = rows[i] + (b * Poly.monomial(i)).scale(s)
        return DiffOp(tuple(rows))

    def to_str(self) -> str:
        return _render(self.rows, "z", "T")

    def __str__(self) -> str:
        return self.to_str()


def theta_form(phi: DiffOp) -> tuple[ThetaOp, int]:
    """(Theta, m) with z^m phi = Theta and m >= 0 minimal."""
    shifts = [j - i for i, j, _ in phi.terms()]
    m = max(0, -min(shifts, default=0))
    rows: list[Poly] = [Poly()] * (phi.order + 1)
    for i, j, c in phi.terms():
        fall = falling_poly(0, i).scale(c)
        s = j + m - i
        for k, fk in enumerate(fall.coeffs):
            if fk != 0:
                rows[k] = rows[k] + Poly.monomial(s, fk)
    return ThetaOp(tuple(rows)), m


def ramify(phi: DiffOp, u: int) -> DiffOp:
    """Annihilator of f(z^u): z -> z^u, theta -> theta / u, denominators cleared."""
    if u < 1:
        raise PreconditionError("ramification index must be positive")
    if u == 1:
        return phi.normalized()
    theta, _ = theta_form(phi)
    K = theta.order
    rows = tuple(b.substitute_power(u).scale(u ** (K - k)) for k, b in enumerate(theta.rows))
    return strip_z(ThetaOp(rows).to_diffop()).normalized()


def descend(phi: DiffOp, u: int) -> DiffOp:
    """Annihilator of g when phi annihilates g(z^u): z^u -> z, theta -> u theta."""
    if u < 1:
        raise PreconditionError("descent index must be positive")
    theta = theta_form(phi)[0].strip_z()
    rows = []
    for k, b in enumerate(theta.rows):
        if any(c != 0 and s % u for s, c in enumerate(b.coeffs)):
            raise DescentError("descent requires μ_u-invariant operator")
        rows.append(Poly(tuple(b.coeffs[::u])).scale(u ** k))
    return strip_z(ThetaOp(tuple(rows)).to_diffop()).normalized()


# ---------------------------------------------------------------------------
# Rational-coefficient operators, Euclidean division
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class RatOp:
    """sum_i rows[i] D^i with rows in Q(z)."""

    rows: tuple = ()

    def __post_init__(self):
        rows = [RatFun.of(r) for r in self.rows]
        while rows and rows[-1].is_zero():
            rows.pop()
        object.__setattr__(self, "rows", tuple(rows))

    @classmethod
    def of(cls, op) -> "RatOp":
        if isinstance(op, RatOp):
            return op
        return cls(tuple(RatFun.of(r) for r in op.rows))

    @property
    def order(self) -> int:
        return len(self.rows) - 1

    def is_zero(self) -> bool:
        return not self.rows

    def row(self, i: int) -> RatFun:
        return self.rows[i] if 0 <= i < len(self.rows) else RatFun.of(0)

    def __add__(self, other: "RatOp") -> "RatOp":
        n = max(len(self.rows), len(other.rows))
        return RatOp(tuple(self.row(i) + other.row(i) for i in range(n)))

    def __neg__(self) -> "RatOp":
        return RatOp(tuple(-r for r in self.rows))

    def __sub__(self, other: "RatOp") -> "RatOp":
        return self + (-other)

    def __mul__(self, other: "RatOp") -> "RatOp":
        return RatOp(tuple(_leibniz_rows(self.rows, other.rows, RatFun.derivative, RatFun.of(0))))

    def is_polynomial(self) -> bool:
        return all(r.is_poly() for r in self.rows)

    def as_diffop(self) -> DiffOp:
        if not self.is_polynomial():
            raise PreconditionError("operator has non-polynomial coefficients")
        return DiffOp(tuple(r.num.scale(1 / r.den.lead) for r in self.rows))

    def cleared(self) -> DiffOp:
        """Left-multiply by the lcm of denominators and remove the polynomial content."""
        den = Poly.const(1)
        for r in self.rows:
            den = den * (r.den // Poly.gcd(den, r.den))
        rows = [(r.num * (den // r.den)) for r in self.rows]
        g = Poly()
        for r in rows:
            g = Poly.gcd(g, r) if not g.is_zero() else r.monic()
        if g.degree > 0:
            rows = [r // g for r in rows]
        return DiffOp(tuple(rows)).normalized()

    def __str__(self) -> str:
        parts = []
        for i in range(len(self.rows) - 1, -1, -1):
            r = self.rows[i]
            if r.is_zero():
                continue
            parts.append(f"({r})" + ("" if i == 0 else f"*D^{i}" if i > 1 else "*D"))
        return " + ".join(parts) if parts else "0"


def _d_power(k: int, c: RatFun) -> RatOp:
    return RatOp(tuple([RatFun.of(0)] * k + [c]))


def right_divide(A, B) -> tuple[RatOp, RatOp]:
    """(q, r) with A = q B + r and ord r < ord B, over Q(z)."""
    A, B = RatOp.of(A), RatOp.of(B)
    if B.is_zero():
        raise ZeroDivisionError("right division by the zero operator")
    q = RatOp()
    r = A
    lead = B.rows[-1]
    while not r.is_zero() and r.order >= B.order:
        t = _d_power(r.order - B.order, r.rows[-1] / lead)
        q = q + t
        r = r - t * B
    return q, r


def _euclid(A, B):
    """Remainder sequence with left cofactors: R_i = s_i A + t_i B."""
    r0, r1 = RatOp.of(A), RatOp.of(B)
    s0, s1 = RatOp((RatFun.of(1),)), RatOp()
    t0, t1 = RatOp(), RatOp((RatFun.of(1),))
    while not r1.is_zero():
        q, r = right_divide(r0, r1)
        r0, r1 = r1, r
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    return r0, s1, t1


def lclm(A: DiffOp, B: DiffOp) -> DiffOp:
    """Least common left multiple, cleared to polynomial coefficients."""
    if A.is_zero() or B.is_zero():
        raise PreconditionError("lclm needs nonzero operators")
    _, s, _ = _euclid(A, B)
    L = s * RatOp.of(A)
    logger.debug("lclm order %d from orders %d, %d", L.order, A.order, B.order)
    return L.cleared()


def gcrd(A: DiffOp, B: DiffOp) -> DiffOp:
    """Greatest common right divisor, cleared to polynomial coefficients."""
    g, _, _ = _euclid(A, B)
    return g.cleared()


# ---------------------------------------------------------------------------
# Difference operators
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class DifferenceOp:
    """sum_i rows[i](x) Delta^i, with Delta p = p(x+1) Delta + (p(x+1) - p(x))."""

    rows: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "rows", _strip_rows(self.rows))

    @classmethod
    def const(cls, c: Scalar) -> "DifferenceOp":
        return cls((Poly.const(c),))

    @classmethod
    def x(cls) -> "DifferenceOp":
        return cls((Poly.x(),))

    @classmethod
    def delta(cls) -> "DifferenceOp":
        return cls((Poly(), Poly.const(1)))

    @property
    def order(self) -> int:
        return len(self.rows) - 1

    def row(self, i: int) -> Poly:
        return self.rows[i] if 0 <= i < len(self.rows) else Poly()

    def is_zero(self) -> bool:
        return not self.rows

    def __add__(self, other) -> "DifferenceOp":
        other = _lift_diff(other)
        n = max(len(self.rows), len(other.rows))
        return DifferenceOp(tuple(self.row(i) + other.row(i) for i in range(n)))

    __radd__ = __add__

    def __neg__(self) -> "DifferenceOp":
        return DifferenceOp(tuple(-r for r in self.rows))

    def __sub__(self, other) -> "DifferenceOp":
        return self + (-_lift_diff(other))

    def __rsub__(self, other) -> "DifferenceOp":
        return _lift_diff(other) - self

    def __mul__(self, other) -> "DifferenceOp":
        if isinstance(other, (int, Fraction)):
            return DifferenceOp(tuple(r.scale(other) for r in self.rows))
        return difference_mul(self, _lift_diff(other))

    def __rmul__(self, other) -> "DifferenceOp":
        return difference_mul(_lift_diff(other), self)

    def __pow__(self, k: int) -> "DifferenceOp":
        out = DifferenceOp.const(1)
        for _ in range(k):
            out = difference_mul(out, self)
        return out

    def normalized(self) -> "DifferenceOp":
        if self.is_zero():
            return self
        c = rat_content(c for r in self.rows for c in r.coeffs)
        if self.rows[-1].lead < 0:
            c = -c
        return DifferenceOp(tuple(r.scale(1 / c) for r in self.rows))

    def to_str(self) -> str:
        return _render(self.rows, "x", "Delta")

    def __str__(self) -> str:
        return self.to_str()


def _lift_diff(other) -> DifferenceOp:
    if isinstance(other, DifferenceOp):
        return other
    if isinstance(other, Poly):
        return DifferenceOp((other,))
    if isinstance(other, (int, Fraction)):
        return DifferenceOp.const(other)
    raise TypeError(f"cannot combine DifferenceOp with {type(other).__name__}")


def _delta_times(rows: list) -> list:
    out = [Poly()] * (len(rows) + 1)
    for k, c in enumerate(rows):
        if c.is_zero():
            continue
        c1 = c.shift(1)
        out[k + 1] = out[k + 1] + c1
        out[k] = out[k] + (c1 - c)
    return out


def difference_mul(A: DifferenceOp, B: DifferenceOp) -> DifferenceOp:
    if A.is_zero() or B.is_zero():
        return DifferenceOp()
    acc = [Poly()] * (len(A.rows) + len(B.rows) - 1)
    power = list(B.rows)
    for i, a in enumerate(A.rows):
        if i > 0:
            power = _delta_times(power)
        if a.is_zero():
            continue
        for k, c in enumerate(power):
            acc[k] = acc[k] + a * c
    return DifferenceOp(tuple(acc))


def describe(op) -> str:
    """Parser-readable text for any operator type."""
    if isinstance(op, (DiffOp, ThetaOp, DifferenceOp)):
        return op.to_str()
    if isinstance(op, Poly):
        return op.to_str("z")
    return rat_str(op)

"""
Holonomic sequences and arithmetic diagnostics.

Recurrences are kept in the canonical form  sum_i P_i(n) a(n+i) = 0  with the
lowest shift at 0.  Diagnostics (condition-(G) reports, Pochhammer growth,
Galochkin denominators) are window-relative: they report the constants
achieved on [n0, N], never an asymptotic claim.
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
from sympy import QQ, Integer, Rational, Symbol, cancel, fraction, lcm
from sympy import Poly as SymPoly
from sympy.polys.matrices import DomainMatrix

from geops.config import (
    GALOCHKIN_VERIFY_STEPS,
    GEVREY_MIN_TERMS,
    GEVREY_SNAP_DENOMINATOR,
    GEVREY_TAIL_START,
    RATE_CEILING,
    RATE_DRIFT_TOLERANCE,
)
from geops.errors import InconsistencyError, PreconditionError, RecurrenceError
from geops.kernel import Poly, RatFun, Scalar, as_rat, falling_poly, rat_content, rising_poly
from geops.opalg import DiffOp, RatOp, ThetaOp, right_divide, strip_z

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Recurrences
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class Recurrence:
    """sum_i coeffs[i](n) a(n+i) = 0, content-normalized, lowest shift 0."""

    coeffs: tuple = ()

    def __post_init__(self):
        cs = list(self.coeffs)
        while cs and cs[-1].is_zero():
            cs.pop()
        lead_zeros = 0
        while cs and cs[0].is_zero():
            cs.pop(0)
            lead_zeros += 1
        if lead_zeros:
            cs = [p.shift(-lead_zeros) for p in cs]
        if cs:
            c = rat_content(c for p in cs for c in p.coeffs)
            if cs[-1].lead < 0:
                c = -c
            cs = [p.scale(1 / c) for p in cs]
        object.__setattr__(self, "coeffs", tuple(cs))

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def coeff(self, i: int) -> Poly:
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else Poly()

    def residual(self, a: Sequence[Fraction], n: int) -> Fraction:
        """sum_i P_i(n) a_{n+i}, with a_k = 0 for k < 0."""
        total = Fraction(0)
        for i, p in enumerate(self.coeffs):
            k = n + i
            if 0 <= k < len(a) and a[k] != 0:
                total += p(Fraction(n)) * a[k]
        return total

    def singular_indices(self, upto: int) -> list[int]:
        """Indices k = n + r (n >= 0) at which the leading coefficient vanishes."""
        lead = self.coeffs[-1]
        return [n + self.order for n in range(0, max(0, upto - self.order + 1)) if lead(Fraction(n)) == 0]

    def to_str(self) -> str:
        parts = []
        for i in range(len(self.coeffs) - 1, -1, -1):
            p = self.coeffs[i]
            if p.is_zero():
                continue
            ref = "a(n)" if i == 0 else f"a(n+{i})"
            if p.coeffs == (Fraction(1),):
                parts.append(ref)
            elif p.coeffs == (Fraction(-1),):
                parts.append(f"-{ref}")
            else:
                parts.append(f"({p.to_str('n')})*{ref}")
        return " + ".join(parts).replace("+ -", "- ") + " = 0"

    def __str__(self) -> str:
        return self.to_str()


@dataclass(frozen=True)
class SequenceWindow:
    terms: tuple
    provenance: str = ""

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(as_rat(t) for t in self.terms))

    @property
    def N(self) -> int:
        return len(self.terms) - 1

    def __len__(self) -> int:
        return len(self.terms)

    def __getitem__(self, n):
        return self.terms[n]


def operator_to_recurrence(phi: DiffOp) -> Recurrence:
    """Coefficient identification of phi(sum a_n z^n) = 0."""
    if phi.is_zero():
        raise PreconditionError("operator_to_recurrence of the zero operator")
    s_min = min(i - j for i, j, _ in phi.terms())
    coeffs: dict[int, Poly] = {}
    for i, j, c in phi.terms():
        t = i - j - s_min
        coeffs[t] = coeffs.get(t, Poly()) + falling_poly(t, i).scale(c)
    r = max(coeffs)
    return Recurrence(tuple(coeffs.get(t, Poly()) for t in range(r + 1)))


def _boundary_poly(R: Recurrence, inits: Sequence[Fraction]) -> Poly:
    """sum over n in [-r, -1] of (sum_i P_i(n) a_{n+i}) z^{n+r}."""
    r = R.order
    a = list(inits[:r]) + [Fraction(0)] * max(0, r - len(inits))
    return Poly(tuple(R.residual(a, n) for n in range(-r, 0)))


def recurrence_to_operator(R: Recurrence, inits: Optional[Sequence[Scalar]] = None,
                           boundary: bool = True) -> DiffOp:
    """
    theta-calculus image sum_i z^{r-i} P_i(theta - i), stripped of z powers.
    With `boundary`, the polynomial left over by the first terms (default
    initial values a_0 = 1, a_1 = ... = 0) is killed by a power of D.
    """
    r = R.order
    slices = {r - i: p.shift(-i) for i, p in enumerate(R.coeffs) if not p.is_zero()}
    theta = ThetaOp.from_slices(slices)
    full = theta.to_diffop()
    vals = [row.valuation() for row in full.rows if not row.is_zero()]
    e = min(vals, default=0)
    L = strip_z(full)
    if boundary and r > 0:
        if inits is None:
            inits = [Fraction(1)] + [Fraction(0)] * (r - 1)
        B = _boundary_poly(R, [as_rat(c) for c in inits])
        if not B.is_zero():
            B = Poly(B.coeffs[e:])
            L = DiffOp.d() ** (B.degree + 1) * L
            logger.debug("boundary polynomial %s: prepended D^%d", B, B.degree + 1)
    return L.normalized()


def generate(R: Recurrence, inits: Sequence[Scalar], N: int) -> SequenceWindow:
    r = R.order
    if len(inits) < r:
        raise RecurrenceError(f"need at least {r} initial values, got {len(inits)}")
    a = [as_rat(c) for c in inits[: N + 1]]
    lead = R.coeffs[-1]
    for n in range(0, N - r + 1):
        k = n + r
        if k < len(a):
            if R.residual(a, n) != 0:
                logger.warning("initial value a_%d is inconsistent with the relation at n=%d", k, n)
            continue
        lc = lead(Fraction(n))
        if lc == 0:
            raise RecurrenceError(f"leading coefficient vanishes at index {k}; supply a_{k} as an initial value")
        rest = sum((R.coeffs[i](Fraction(n)) * a[n + i] for i in range(r)), Fraction(0))
        a.append(-rest / lc)
    return SequenceWindow(tuple(a), provenance=f"generated from {R.to_str()}")


def order_shift(R: Recurrence, p: int) -> Recurrence:
    """Recurrence for b_n = a_n / (n!)^p."""
    r = R.order
    out = []
    for i, P in enumerate(R.coeffs):
        if p >= 0:
            out.append(P * rising_poly(1, i) ** p)
        else:
            out.append(P * rising_poly(i + 1, r - i) ** (-p))
    return Recurrence(tuple(out))


_N = Symbol("n")


def _to_domain(p: Poly, K):
    expr = sum((Rational(c.numerator, c.denominator) * _N ** k for k, c in enumerate(p.coeffs)), Integer(0))
    return K.from_sympy(expr)


def section(R: Recurrence, u: int, v: int, inits: Optional[Sequence[Scalar]] = None,
            check_terms: int = 60) -> Recurrence:
    """
    Recurrence for c_n = a_{un+v}: express a_{N+k} in the state basis
    a_N .. a_{N+r-1} over Q(n) with N = un + v, and take the first linear
    dependency among the vectors for k = 0, u, 2u, ...
    """
    if not 0 <= v < u:
        raise PreconditionError("section needs 0 <= v < u")
    if u == 1:
        return R
    r = R.order
    if r == 0:
        return R
    K = QQ.frac_field(_N)
    index = Poly((v, u))
    def coeff_at(i: int, offset: int):
        return _to_domain(R.coeffs[i].compose(index + offset), K)

    basis = [[K.one if row == k else K.zero for row in range(r)] for k in range(r)]
    vectors = list(basis)

    def vector(k: int):
        while len(vectors) <= k:
            m = len(vectors)
            shift = m - r
            lead = coeff_at(r, shift)
            acc = [K.zero] * r
            for i in range(r):
                c = coeff_at(i, shift)
                if c == K.zero:
                    continue
                acc = [x - c * y for x, y in zip(acc, vectors[shift + i])]
            vectors.append([x / lead for x in acc])
        return vectors[k]

    relation = None
    for top in range(1, r + 1):
        cols = [vector(u * t) for t in range(top + 1)]
        M = DomainMatrix([[cols[t][row] for t in range(top + 1)] for row in range(r)], (r, top + 1), K)
        null = M.nullspace()
        if null.shape[0] > 0:
            relation = list(null.to_Matrix().row(0))
            logger.debug("section u=%d v=%d: dependency at order %d", u, v, top)
            break
    if relation is None:
        raise RecurrenceError(f"section elimination found no dependency up to order {r}")

    nums, dens = zip(*(fraction(cancel(x)) for x in relation))
    common = 1
    for d in dens:
        common = lcm(common, d)
    polys = []
    for num, den in zip(nums, dens):
        expr = cancel(num * common / den)
        coeffs = SymPoly(expr, _N, domain=QQ).all_coeffs()
        polys.append(Poly(tuple(Fraction(int(c.p), int(c.q)) for c in reversed(coeffs))))
    S = Recurrence(tuple(polys))

    if inits is not None:
        _validate_section(R, S, u, v, inits, check_terms)
    return S


def _validate_section(R, S, u, v, inits, check_terms):
    a = generate(R, inits, u * (check_terms + S.order) + v).terms
    c = [a[u * n + v] for n in range((len(a) - v + u - 1) // u)]
    tail = range(len(c) // 2, len(c) - S.order)
    bad = [n for n in tail if S.residual(c, n) != 0]
    if bad:
        raise RecurrenceError(f"section recurrence fails on the validation window at n={bad[0]}")


def hadamard(A: SequenceWindow, B: SequenceWindow) -> SequenceWindow:
    if len(A) != len(B):
        raise PreconditionError("hadamard needs windows of equal length")
    return SequenceWindow(tuple(x * y for x, y in zip(A.terms, B.terms)), "hadamard product")


def cauchy(A: SequenceWindow, B: SequenceWindow) -> SequenceWindow:
    if len(A) != len(B):
        raise PreconditionError("cauchy needs windows of equal length")
    N = A.N
    out = [sum((A[k] * B[n - k] for k in range(n + 1)), Fraction(0)) for n in range(N + 1)]
    return SequenceWindow(tuple(out), "cauchy product")


# ---------------------------------------------------------------------------
# Rate diagnostics
# ---------------------------------------------------------------------------
@dataclass
class RateSummary:
    """Window statistics of a rate sequence r_n on its tail [n0, N]."""

    rates: dict
    tail_start: int
    tail_max: float
    drift: float
    ceiling: float = RATE_CEILING

    @property
    def bounded(self) -> bool:
        return self.tail_max <= self.ceiling and self.drift <= RATE_DRIFT_TOLERANCE

    @property
    def verdict(self) -> str:
        return "bounded" if self.bounded else "unbounded"

    @property
    def constant(self) -> float:
        return math.exp(self.tail_max) if self.tail_max < 700 else math.inf


def tail_start(N: int) -> int:
    return min(max(GEVREY_TAIL_START, N // 4), N)


def summarize_rates(rates: dict, N: int) -> RateSummary:
    n0 = tail_start(N)
    tail = {n: r for n, r in rates.items() if n >= n0}
    if not tail:
        tail = rates
    if not tail:
        return RateSummary(rates, n0, -math.inf, 0.0)
    ns = np.array(sorted(tail), dtype=float)
    ys = np.array([tail[int(n)] for n in ns])
    drift = float(np.polyfit(np.log(ns), ys, 1)[0]) if len(ns) >= 3 else 0.0
    return RateSummary(rates, n0, float(ys.max()), drift)


def _log_abs(x: Fraction) -> float:
    return math.log(abs(x.numerator)) - math.log(x.denominator)


def denominator_rates(values: Sequence[Fraction]) -> dict:
    d = 1
    out = {}
    for n, b in enumerate(values):
        d = math.lcm(d, as_rat(b).denominator)
        if n >= 1:
            out[n] = math.log(d) / n
    return out


def magnitude_rates(values: Sequence[Fraction]) -> dict:
    return {n: _log_abs(as_rat(b)) / n for n, b in enumerate(values) if n >= 1 and b != 0}


@dataclass
class GevreyReport:
    s: Fraction
    window: tuple
    order_estimate: Optional[float]
    order_snapped: Optional[Fraction]
    denominator: RateSummary
    magnitude: RateSummary

    @property
    def verdicts(self) -> dict:
        return {"denominator": self.denominator.verdict, "magnitude": self.magnitude.verdict}

    @property
    def bounded(self) -> bool:
        return self.denominator.bounded and self.magnitude.bounded

    @property
    def constants(self) -> dict:
        return {"denominator": self.denominator.constant, "magnitude": self.magnitude.constant}


def estimate_gevrey_order(values: Sequence[Fraction], n0: int) -> Optional[float]:
    """Coefficient of n log n in a least-squares fit of log|a_n| on (n log n, n, log n, 1)."""
    pts = [(n, _log_abs(as_rat(a))) for n, a in enumerate(values) if n >= max(n0, 2) and a != 0]
    if len(pts) < 5:
        return None
    n = np.array([p[0] for p in pts], dtype=float)
    y = np.array([p[1] for p in pts])
    A = np.column_stack([n * np.log(n), n, np.log(n), np.ones_like(n)])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    return float(coef[0])


def condition_G_report(W: SequenceWindow, s: Scalar) -> GevreyReport:
    s = as_rat(s)
    if len(W) < GEVREY_MIN_TERMS:
        raise PreconditionError(f"window too short: {len(W)} terms, need {GEVREY_MIN_TERMS}")
    p, q = s.numerator, s.denominator
    b = []
    for n, a in enumerate(W.terms):
        f = math.factorial(n // q)
        b.append(a / Fraction(f) ** p if p >= 0 else a * Fraction(f) ** (-p))
    N = W.N
    n0 = tail_start(N)
    est = estimate_gevrey_order(W.terms, n0)
    snapped = Fraction(est).limit_denominator(GEVREY_SNAP_DENOMINATOR) if est is not None else None
    report = GevreyReport(
        s=s,
        window=(n0, N),
        order_estimate=est,
        order_snapped=snapped,
        denominator=summarize_rates(denominator_rates(b), N),
        magnitude=summarize_rates(magnitude_rates(b), N),
    )
    logger.info("condition (G) at s=%s on [%d, %d]: %s", s, n0, N, report.verdicts)
    return report


@dataclass
class PochhammerReport:
    a: Fraction
    b: Fraction
    values: tuple
    rates: RateSummary


def pochhammer_growth(a: Scalar, b: Scalar, N: int) -> PochhammerReport:
    a, b = as_rat(a), as_rat(b)
    for name, x in (("a", a), ("b", b)):
        if x.denominator == 1 and x <= 0:
            raise PreconditionError(f"pole in Pochhammer: {name} = {x} is a nonpositive integer")
    values = [Fraction(1)]
    for n in range(N):
        values.append(values[-1] * (a + n) / (b + n))
    return PochhammerReport(a, b, tuple(values), summarize_rates(denominator_rates(values), N))


def chebyshev_rates(N: int, start: int = 1) -> dict:
    """(1/n) log lcm(1..n)"""
    d = 1
    out = {}
    for n in range(1, N + 1):
        d = math.lcm(d, n)
        if n >= start:
            out[n] = math.log(d) / n
    return out


# ---------------------------------------------------------------------------
# Galochkin denominators
# ---------------------------------------------------------------------------
@dataclass
class GalochkinReport:
    denominators: tuple
    rates: RateSummary
    first_operators: tuple = field(default_factory=tuple)


def _galochkin_step(S: list, m: int, q: Poly, dq: Poly, lower: tuple) -> list:
    mu = len(S)
    top = S[mu - 1]
    out = []
    for j in range(mu):
        v = q * S[j].derivative() - dq * S[j] * m
        if j >= 1:
            v = v + q * S[j - 1]
        v = v - top * lower[j]
        out.append(v)
    return out


def galochkin_sequence(phi: DiffOp, N: int) -> GalochkinReport:
    """
    Denominators d_m of the Q_{m,j} with
    (1/m!) Q_mu^m D^{m+mu-1} = (...) phi - sum_j Q_{m,j} D^j,  m = 1..N.
    Remainders are carried as S_m = Q_mu^m (D^{m+mu-1} mod phi), which
    stays polynomial.
    """
    mu = phi.order
    if mu < 1:
        raise PreconditionError("galochkin_sequence needs an operator of positive order")
    q = phi.leading
    dq = q.derivative()
    lower = tuple(phi.row(j) for j in range(mu))
    S = [-lower[j] for j in range(mu)]
    d = 1
    dens = []
    firsts = []
    fact = 1
    for m in range(1, N + 1):
        if m > 1:
            S = _galochkin_step(S, m - 1, q, dq, lower)
        fact *= m
        Q = [p.scale(Fraction(-1, fact)) for p in S]
        if m <= GALOCHKIN_VERIFY_STEPS:
            _verify_galochkin(phi, m, fact, Q)
            firsts.append(DiffOp(tuple(Q)))
        for p in Q:
            for c in p.coeffs:
                d = math.lcm(d, c.denominator)
        dens.append(d)
    rates = {m: math.log(dm) / m for m, dm in enumerate(dens, start=1)}
    summary = summarize_rates(rates, N)
    logger.info("galochkin: %d steps, tail max rate %.4f (%s)", N, summary.tail_max, summary.verdict)
    return GalochkinReport(tuple(dens), summary, tuple(firsts))


def _verify_galochkin(phi: DiffOp, m: int, fact: int, Q: list) -> None:
    mu = phi.order
    lhs = RatOp(tuple([RatFun.of(0)] * (m + mu - 1) + [RatFun.of(phi.leading ** m * Fraction(1, fact))]))
    _, rem = right_divide(lhs, phi)
    for j in range(mu):
        if not rem.row(j).is_poly():
            raise InconsistencyError(f"non-polynomial Galochkin coefficient at m={m}, j={j}")
        if rem.row(j).num != -Q[j]:
            raise InconsistencyError(f"Galochkin remainder mismatch at m={m}, j={j}")

"""
Formal Mellin correspondence between difference operators in x and
differential operators in z:

    x -> -z D,    Delta -> z - 1

and between generalized factorial series
g(x) = sum b_n Gamma(x) / Gamma(x + n + rho + 1) and series in (1 - z).
Solutions of difference operators are only handled through their images.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from geops.arith import GevreyReport, SequenceWindow, condition_G_report
from geops.errors import PreconditionError
from geops.kernel import Poly, Scalar, as_rat, log_inverse_one_minus, one_minus_exp_neg, pochhammer, poly_compose_truncated, rat_str
from geops.opalg import DiffOp, DifferenceOp, theta_form
from geops.series import Branch, PuiseuxLogSeries, rgamma_seed

logger = logging.getLogger(__name__)

SERIES_VARIABLE = "(1-z)"


def _is_negative_integer(r: Fraction) -> bool:
    return r.denominator == 1 and r < 0


@dataclass(frozen=True)
class FactorialSeries:
    """sum_n coeffs[n] Gamma(x) / Gamma(x + n + rho + 1), n = 0..N."""

    rho: Fraction
    coeffs: tuple
    # a negative integer rho makes the series map non-injective
    allow_negative_integer: bool = False

    def __post_init__(self):
        object.__setattr__(self, "rho", as_rat(self.rho))
        object.__setattr__(self, "coeffs", tuple(as_rat(c) for c in self.coeffs))
        if _is_negative_integer(self.rho) and not self.allow_negative_integer:
            raise PreconditionError(
                f"rho = {rat_str(self.rho)} is a negative integer; pass allow_negative_integer=True"
            )

    @property
    def N(self) -> int:
        return len(self.coeffs) - 1


# ---------------------------------------------------------------------------
# Operators
# ---------------------------------------------------------------------------
def _theta_poly(p: Poly, sign: int) -> DiffOp:
    """p(sign * theta) in the Weyl algebra."""
    theta = DiffOp.z() * DiffOp.d()
    if sign < 0:
        theta = -theta
    acc = DiffOp()
    for c in reversed(p.coeffs):
        acc = acc * theta + c
    return acc


def mellin_operator(xi: DifferenceOp) -> DiffOp:
    """sum_i rows[i](x) Delta^i  ->  sum_i rows[i](-theta) (z - 1)^i, not normalized."""
    out = DiffOp()
    for i, r in enumerate(xi.rows):
        if r.is_zero():
            continue
        out = out + _theta_poly(r, -1) * DiffOp.of_poly(Poly.linear(-1) ** i)
    return out


def inverse_mellin_operator(phi: DiffOp) -> DifferenceOp:
    """
    Preimage through the theta form: z -> Delta + 1, theta -> -x.  When phi
    has terms z^j D^i with j < i it only has a preimage after a left factor
    z^m, and that is what is returned.
    """
    theta, m = theta_form(phi)
    if m > 0:
        logger.warning("operator is not in the Mellin image; returning the preimage of z^%d times it", m)
    shifted = DifferenceOp.delta() + 1
    out = DifferenceOp()
    for k, b in enumerate(theta.rows):
        if b.is_zero():
            continue
        left = DifferenceOp()
        for s, c in enumerate(b.coeffs):
            if c != 0:
                left = left + (shifted ** s) * c
        out = out + left * DifferenceOp((Poly.monomial(k, (-1) ** k),))
    return out


# ---------------------------------------------------------------------------
# Series
# ---------------------------------------------------------------------------
def mellin_series(g: FactorialSeries) -> PuiseuxLogSeries:
    """
    (1 - z)^rho sum_n b_n (1 - z)^n / Gamma(n + rho + 1), with
    Gamma(n + rho + 1) = Gamma(rho + 1) (rho + 1)_n kept as one seed.
    """
    rho = g.rho
    if _is_negative_integer(rho):
        coeffs = [
            b / math.factorial(n + rho.numerator) if n + rho.numerator >= 0 else Fraction(0)
            for n, b in enumerate(g.coeffs)
        ]
        start = next((n for n, c in enumerate(coeffs) if c != 0), len(coeffs))
        rows = tuple((c,) for c in coeffs[start:]) or ((Fraction(0),),)
        return PuiseuxLogSeries((Branch(rho + start, rows),), 1, SERIES_VARIABLE)
    seed = rgamma_seed(rho + 1)
    rows = tuple(((seed * (b / pochhammer(rho + 1, n))).simplify(),) for n, b in enumerate(g.coeffs))
    return PuiseuxLogSeries((Branch(rho, rows),), 1, SERIES_VARIABLE)


def nicole_convert(values: Sequence[Scalar], N: Optional[int] = None, reverse: bool = False,
                   rho: Scalar = 0) -> list:
    """
    With B(z) = sum b_n z^n / n! and A(w) = sum a_n w^n / n!, the factorial
    series sum b_n Gamma(x) / Gamma(x + n + 1) equals sum a_n x^{-n-1} when
    B(z) = A(log 1/(1 - z)).  Forward maps b to a, reverse maps a to b.
    """
    if as_rat(rho) != 0:
        raise PreconditionError("Nicole conversion is only available for rho = 0")
    N = len(values) - 1 if N is None else N
    src = [as_rat(v) / math.factorial(n) for n, v in enumerate(values[: N + 1])]
    inner = log_inverse_one_minus(N) if reverse else one_minus_exp_neg(N)
    composed = poly_compose_truncated(src, inner, N)
    return [c * math.factorial(n) for n, c in enumerate(composed)]


def factorial_gevrey_check(g: FactorialSeries, s: Scalar) -> GevreyReport:
    """Condition (G) on b_n / (n!)^{s+1}."""
    window = SequenceWindow(g.coeffs, provenance=f"factorial series rho={rat_str(g.rho)}")
    return condition_G_report(window, as_rat(s) + 1)


def factorial_series_from_frobenius(phi: DiffOp, rho: Scalar, N: int) -> FactorialSeries:
    """
    Factorial series whose Mellin image is the log-free Frobenius solution of
    phi at z = 1 with exponent rho.  (z - 1)^{rho+n} and (1 - z)^{rho+n} differ
    by (-1)^n up to a constant; Gamma(rho + 1) is dropped as a constant too.
    """
    from geops.solutions import frobenius_basis

    rho = as_rat(rho)
    basis = frobenius_basis(phi, 1, N)
    match = next((s for s in basis.solutions if s.exponent == rho and s.log_degree == 0), None)
    if match is None:
        found = ", ".join(rat_str(s.exponent) for s in basis.solutions)
        raise PreconditionError(f"no log-free solution with exponent {rat_str(rho)} at z = 1 (found: {found})")
    b = []
    for n in range(N + 1):
        c = as_rat(match.series.coefficient(rho + n, 0))
        b.append((-1) ** n * c * pochhammer(rho + 1, n))
    logger.debug("factorial series at rho=%s from %s: %d terms", rho, phi, len(b))
    return FactorialSeries(rho, tuple(b), allow_negative_integer=True)


def fixture_pair_check(phi: DiffOp, rho: Scalar, rho_prime: Scalar, s: Scalar, N: int) -> dict:
    """
    Gevrey verdicts at order s for the factorial series attached to the
    exponents rho and rho_prime = rho + integer of phi at z = 1; they are
    expected to agree.
    """
    rho, rho_prime = as_rat(rho), as_rat(rho_prime)
    if (rho_prime - rho).denominator != 1:
        raise PreconditionError(
            f"exponents {rat_str(rho)} and {rat_str(rho_prime)} do not differ by an integer"
        )
    first = factorial_gevrey_check(factorial_series_from_frobenius(phi, rho, N), s)
    second = factorial_gevrey_check(factorial_series_from_frobenius(phi, rho_prime, N), s)
    agree = first.verdicts == second.verdicts
    if not agree:
        logger.warning("factorial series verdicts differ: %s vs %s", first.verdicts, second.verdicts)
    return {"rho": first, "rho_prime": second, "agree": agree}

"""
Formal Laplace transform between E-series, G-series and Puiseux-log series,
and the operator pipelines built on it.

For a monomial z^e log^k z the transform is the regular part of
k! [eps^k] Gamma(e + 1 + eps) z^{-e-1-eps}.  Away from the poles this is
Gamma(e+1) z^{-e-1} sum_j rho_{m,j} log^j z, with all Gamma data taken at
the class representative p of e (e = p + m, 0 <= p < 1), so that series in
the same exponent class share their seeds.
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from geops.errors import DescentError, PreconditionError
from geops.kernel import Scalar, as_rat, exp_series, pochhammer, rat_str
from geops.opalg import (
    DiffOp,
    apply,
    descend,
    fourier_laplace,
    invert,
    ramify,
    strip_z,
    symmetry,
)
from geops.series import (
    Branch,
    PuiseuxLogSeries,
    Seed,
    SeedCombo,
    exponent_class,
    gamma_seed,
)

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Power series <-> 1/z series
# ---------------------------------------------------------------------------
def laplace_series(F: Sequence[Scalar]) -> PuiseuxLogSeries:
    """sum c_n z^n  ->  sum n! c_n z^{-n-1}"""
    rows = tuple((math.factorial(n) * as_rat(c),) for n, c in enumerate(F))
    return PuiseuxLogSeries((Branch(Fraction(-1), rows),), -1)


def borel_series(h: PuiseuxLogSeries) -> list[Fraction]:
    """Inverse of laplace_series on 1/z series without logs."""
    if h.direction != -1 or h.log_degree > 0:
        raise PreconditionError("borel_series needs a log-free series in 1/z")
    valid = h.valid_through()
    if set(valid) - {Fraction(0)}:
        raise PreconditionError("borel_series needs integer exponents")
    out = []
    for n in range(int(-valid.get(Fraction(0), Fraction(0)))):
        c = h.coefficient(-n - 1)
        if isinstance(c, SeedCombo):
            raise PreconditionError("borel_series needs rational coefficients")
        out.append(c / math.factorial(n))
    return out


# ---------------------------------------------------------------------------
# rho tables
# ---------------------------------------------------------------------------
def _unit(K: int, i: int) -> list:
    return [Fraction(int(j == i)) for j in range(K + 1)]


def _step_forward(rows: list, alpha: Fraction, m: int) -> list:
    """rho_{m,j} = rho_{m-1,j} - (j+1)/(alpha+m) rho_{m-1,j+1}"""
    K = len(rows) - 1
    d = alpha + m
    out = []
    for j in range(K + 1):
        v = list(rows[j])
        if j < K:
            v = [x - Fraction(j + 1) / d * y for x, y in zip(v, rows[j + 1])]
        out.append(v)
    return out


def _step_backward(rows: list, alpha: Fraction, m: int) -> list:
    """Row m - 1 from row m."""
    K = len(rows) - 1
    d = alpha + m
    out: list = [None] * (K + 1)
    out[K] = list(rows[K])
    for j in range(K - 1, -1, -1):
        out[j] = [x + Fraction(j + 1) / d * y for x, y in zip(rows[j], out[j + 1])]
    return out


@dataclass
class RhoTable:
    """
    rows[m][j] is the coefficient vector of rho_{m,j} on the basis
    rho_{0,0}, ..., rho_{0,K}.
    """

    alpha: Fraction
    K: int
    rows: dict = field(default_factory=dict)
    flagged: list = field(default_factory=list)

    def vector(self, m: int, j: int) -> list:
        return self.rows[m][j]

    def value(self, m: int, j: int):
        """rho_{m,j} with rho_{0,K} = (-1)^K and the other base entries as seeds."""
        acc = SeedCombo()
        for i, c in enumerate(self.rows[m][j]):
            if c == 0:
                continue
            if i == self.K:
                acc = acc + c * (-1) ** self.K
            else:
                acc = acc + SeedCombo.of_seed(Seed("rho", self.alpha, i), c)
        return acc.simplify()


def rho_table(alpha: Scalar, K: int, M: int) -> RhoTable:
    alpha = as_rat(alpha)
    table = RhoTable(alpha, K)
    base = [_unit(K, j) for j in range(K + 1)]
    table.rows[0] = base
    rows = base
    for m in range(1, M + 1):
        if alpha + m == 0:
            table.flagged.append(m)
            logger.warning("rho table at alpha=%s: row %d sits on the pole", alpha, m)
            break
        rows = _step_forward(rows, alpha, m)
        table.rows[m] = rows
    rows = base
    for m in range(0, -M, -1):
        if alpha + m == 0:
            table.flagged.append(m - 1)
            logger.warning("rho table at alpha=%s: row %d sits on the pole", alpha, m - 1)
            break
        rows = _step_backward(rows, alpha, m)
        table.rows[m - 1] = rows
    return table


def _rho_rows(p: Fraction, K: int, m: int) -> list:
    rows = [_unit(K, j) for j in range(K + 1)]
    if m >= 0:
        for t in range(1, m + 1):
            rows = _step_forward(rows, p, t)
    else:
        for t in range(0, m, -1):
            rows = _step_backward(rows, p, t)
    return rows


# ---------------------------------------------------------------------------
# Monomials
# ---------------------------------------------------------------------------
def _gamma_ratio(p: Fraction, m: int) -> Fraction:
    """Gamma(p + 1 + m) / Gamma(p + 1)"""
    if m >= 0:
        return pochhammer(p + 1, m)
    return 1 / pochhammer(p + 1 + m, -m)


def _image_regular(e: Fraction, k: int) -> list:
    p = exponent_class(e)
    m = int(e - p)
    rows = _rho_rows(p, k, m)
    ratio = _gamma_ratio(p, m)
    # Gamma(p+1) rho_{0,i} = C(k,i) (-1)^i Gamma^{(k-i)}(p+1)
    base = [gamma_seed(p + 1, k - i) * (math.comb(k, i) * (-1) ** i) for i in range(k + 1)]
    out = []
    for j in range(k + 1):
        acc = SeedCombo()
        for i, c in enumerate(rows[j]):
            if c != 0:
                acc = acc + base[i] * (c * ratio)
        out.append(acc.simplify())
    return out


def _image_pole(r: int, k: int) -> list:
    """e = -1 - r: k! [eps^{k+1}] Gamma(1+eps) e^{-eps log z} / prod_{i=1..r}(eps - i)."""
    order = k + 1
    h = [Fraction(1)] + [Fraction(0)] * order
    for i in range(1, r + 1):
        inv = [-Fraction(1, i ** (t + 1)) for t in range(order + 1)]
        h = [sum((h[a] * inv[t - a] for a in range(t + 1)), Fraction(0)) for t in range(order + 1)]
    g = []
    for a in range(order + 1):
        acc = SeedCombo()
        for l in range(a + 1):
            if h[a - l] != 0:
                acc = acc + gamma_seed(1, l) * (h[a - l] / math.factorial(l))
        g.append(acc)
    out = []
    for j in range(order + 1):
        c = g[order - j] * (Fraction((-1) ** j, math.factorial(j)) * math.factorial(k))
        out.append(c.simplify())
    return out


def laplace_monomial(e: Scalar, k: int = 0) -> list:
    """Log-coefficients of the image of z^e log^k z, all carried by z^{-e-1}."""
    e = as_rat(e)
    if e.denominator == 1 and e <= -1:
        return _image_pole(int(-1 - e), k)
    return _image_regular(e, k)


def laplace_puiseux(alpha: Scalar, k: int = 0) -> PuiseuxLogSeries:
    alpha = as_rat(alpha)
    row = tuple(laplace_monomial(alpha, k))
    return PuiseuxLogSeries((Branch(-alpha - 1, (row,)),), -1)


# ---------------------------------------------------------------------------
# Full series
# ---------------------------------------------------------------------------
def laplace_full(y: PuiseuxLogSeries) -> PuiseuxLogSeries:
    """Branchwise transform; a series at 0 goes to a series in 1/z and back."""
    branches = []
    for b in y.branches:
        rows = []
        for n, row in enumerate(b.rows):
            e = y.exponent(b, n)
            acc: list = []
            for k, c in enumerate(row):
                if c == 0:
                    continue
                image = laplace_monomial(e, k)
                if len(acc) < len(image):
                    acc += [Fraction(0)] * (len(image) - len(acc))
                for j, v in enumerate(image):
                    acc[j] = acc[j] + v * c
            rows.append(tuple(acc) or (Fraction(0),))
        branches.append(Branch(-b.base - 1, tuple(rows)))
    return PuiseuxLogSeries(tuple(branches), -y.direction, y.variable)


def laplace_inverse(h: PuiseuxLogSeries) -> PuiseuxLogSeries:
    """
    Inverse of laplace_full on its image.  Per exponent the log-coefficients
    are peeled from the top degree down; a leftover term means h is not
    the transform of a series with rational coefficients.
    """
    branches = []
    for b in h.branches:
        rows = []
        for n, row in enumerate(b.rows):
            x = h.exponent(b, n)
            e = -x - 1
            pole = e.denominator == 1 and e <= -1
            residual = list(row)
            source = [Fraction(0)] * len(row)
            for j in range(len(residual) - 1, -1, -1):
                if residual[j] == 0:
                    continue
                k = j - 1 if pole else j
                if k < 0:
                    raise PreconditionError(f"log-free term at z^{rat_str(x)} is not in the image")
                image = laplace_monomial(e, k)
                c = SeedCombo.lift(residual[j]).ratio_to(SeedCombo.lift(image[j]))
                if c is None:
                    raise PreconditionError(f"coefficient of z^{rat_str(x)} log^{j} is not in the image")
                source[k] = c
                for t, v in enumerate(image):
                    residual[t] = residual[t] - v * c
            rows.append(tuple(source))
        branches.append(Branch(-b.base - 1, tuple(rows)))
    return PuiseuxLogSeries(tuple(branches), -h.direction, h.variable)


def agree(a: PuiseuxLogSeries, b: PuiseuxLogSeries) -> bool:
    """Equality on the exponents both truncations cover."""
    if a.direction != b.direction:
        return False
    d = a.direction
    va, vb = a.valid_through(), b.valid_through()
    for cls in set(va) | set(vb):
        limits = [v for v in (va.get(cls), vb.get(cls)) if v is not None]
        last = min(limits) if d == 1 else max(limits)
        for series in (a, b):
            for e, k, _ in series.terms():
                if exponent_class(e) == cls and (e - last) * d <= 0:
                    if a.coefficient(e, k) != b.coefficient(e, k):
                        return False
    return True


# ---------------------------------------------------------------------------
# Partie finie and identity checks
# ---------------------------------------------------------------------------
def partie_finie_integral(alpha: Scalar, k: int, n: int) -> list:
    """
    p.f. of int_0^z (z-t)^n/n! t^alpha log^k t dt, as log-coefficients of
    z^{alpha+n+1}.
    """
    alpha = as_rat(alpha)
    out = [Fraction(0)] * (k + 2)
    for m in range(n + 1):
        w = Fraction((-1) ** m, math.factorial(m) * math.factorial(n - m))
        beta = alpha + m
        if beta == -1:
            out[k + 1] += w / (k + 1)
            continue
        for l in range(k + 1):
            c = Fraction((-1) ** l * math.factorial(k), math.factorial(k - l)) / (beta + 1) ** (l + 1)
            out[k - l] += w * c
    while len(out) > 1 and out[-1] == 0:
        out.pop()
    return out


def check_partie_finie_definition(alpha: Scalar, k: int, n: int) -> bool:
    """h^+ = z^{n+1} (p.f. int_0^z (z-t)^n/n! h(t) dt)^+ for h = z^alpha log^k z."""
    alpha = as_rat(alpha)
    if alpha + n + 1 <= 0:
        raise PreconditionError("n must satisfy n >= -alpha - 1")
    lhs = laplace_monomial(alpha, k)
    rhs: list = []
    for j, c in enumerate(partie_finie_integral(alpha, k, n)):
        if c == 0:
            continue
        image = laplace_monomial(alpha + n + 1, j)
        rhs += [Fraction(0)] * max(0, len(image) - len(rhs))
        for t, v in enumerate(image):
            rhs[t] = rhs[t] + v * c
    width = max(len(lhs), len(rhs))
    lhs = list(lhs) + [Fraction(0)] * (width - len(lhs))
    rhs = list(rhs) + [Fraction(0)] * (width - len(rhs))
    return all(SeedCombo.lift(x) == SeedCombo.lift(y) for x, y in zip(lhs, rhs))


def pochhammer_sum_identity(alpha: Scalar, n: int) -> bool:
    """sum_{m<=n} (-1)^m/(m!(n-m)!) 1/(m+alpha+1) == 1/(alpha+1)_{n+1}"""
    alpha = as_rat(alpha)
    t = -alpha - 1
    if t.denominator == 1 and 0 <= t <= n:
        raise PreconditionError(f"-alpha-1 = {t} lies in [0, {n}]")
    lhs = sum(
        (Fraction((-1) ** m, math.factorial(m) * math.factorial(n - m)) / (m + alpha + 1) for m in range(n + 1)),
        Fraction(0),
    )
    return lhs == 1 / pochhammer(alpha + 1, n + 1)


def _coeffs(F: Sequence[Scalar]) -> list[Fraction]:
    return [as_rat(c) for c in F]


def check_derivative_rule(F: Sequence[Scalar]) -> bool:
    """d/dz F^+ = (-z F)^+"""
    F = _coeffs(F)
    return agree(laplace_series(F).derivative(), laplace_series([Fraction(0)] + [-c for c in F]))


def check_multiplication_rule(F: Sequence[Scalar]) -> bool:
    """z F^+ = (F')^+ + F(0)"""
    F = _coeffs(F)
    lhs = laplace_series(F).mul_z_power(1)
    dF = [(n + 1) * c for n, c in enumerate(F[1:])]
    constant = PuiseuxLogSeries((Branch(Fraction(0), ((F[0],),) + ((Fraction(0),),) * len(F)),), -1)
    rhs = laplace_series(dF) + constant
    return agree(lhs, rhs)


def check_integral_rule(F: Sequence[Scalar]) -> bool:
    """z^{-1} F^+ = (int_0^z F)^+"""
    F = _coeffs(F)
    integral = [Fraction(0)] + [c / (n + 1) for n, c in enumerate(F)]
    return agree(laplace_series(F).mul_z_power(-1), laplace_series(integral))


def check_shift_rule(F: Sequence[Scalar], a: Scalar) -> bool:
    """F^+(z - a) = (e^{az} F)^+"""
    F = _coeffs(F)
    a = as_rat(a)
    N = len(F) - 1
    plus = laplace_series(F)
    shifted = [Fraction(0)] * (N + 1)
    for n in range(N + 1):
        c = plus.coefficient(-n - 1)
        for t in range(N + 1 - n):
            shifted[n + t] += c * math.comb(n + t, t) * a ** t
    lhs = PuiseuxLogSeries((Branch(Fraction(-1), tuple((c,) for c in shifted)),), -1)
    e = exp_series(N, a)
    prod = [sum((e[i] * F[n - i] for i in range(n + 1)), Fraction(0)) for n in range(N + 1)]
    return agree(lhs, laplace_series(prod))


def check_scaling_rule(F: Sequence[Scalar], a: Scalar) -> bool:
    """F^+(z/a) = a (F(az))^+"""
    F = _coeffs(F)
    a = as_rat(a)
    if a == 0:
        raise PreconditionError("scaling by zero")
    plus = laplace_series(F)
    lhs = plus.map_coeffs(lambda n, k, v: v * a ** (n + 1))
    rhs = laplace_series([c * a ** n for n, c in enumerate(F)]).scale(a)
    return agree(lhs, rhs)


def laplace_identities(F: Sequence[Scalar], a: Scalar = 1) -> dict:
    return {
        "derivative": check_derivative_rule(F),
        "multiplication": check_multiplication_rule(F),
        "integral": check_integral_rule(F),
        "shift": check_shift_rule(F, a),
        "scaling": check_scaling_rule(F, a if as_rat(a) != 0 else 1),
    }


def check_puiseux_derivative_rule(y: PuiseuxLogSeries) -> bool:
    """d/dz y^+ = (-z y)^+ on a Puiseux-log series."""
    return agree(laplace_full(y).derivative(), laplace_full(y.mul_z_power(1).scale(-1)))


# ---------------------------------------------------------------------------
# Operator pipelines
# ---------------------------------------------------------------------------
def build_E_operator(phi: DiffOp, from_laplace_side: bool = False) -> DiffOp:
    """
    Phi annihilating F = sum f_n z^n / n! for the power-series solutions f of
    phi.  Psi annihilates F^+ = z^{-1} f(1/z) and Phi is its symmetrized FL
    transform.  With from_laplace_side, phi is taken as Psi itself and the
    result is reflected through z -> -z.
    """
    if phi.is_zero():
        raise PreconditionError("build_E_operator of the zero operator")
    psi = phi if from_laplace_side else strip_z(invert(phi) * DiffOp.z()).normalized()
    Phi = fourier_laplace(psi, symmetrized=True)
    if from_laplace_side:
        Phi = symmetry(Phi)
    logger.info("E-operator %s from Psi = %s", Phi, psi)
    return Phi


def build_G_operator(Phi: DiffOp, N: int = 30) -> DiffOp:
    """
    Reverse pipeline: FL(Phi) kills F^+ up to a polynomial of degree below
    deg_z Phi.  The polynomial is measured on the power-series solutions of
    Phi at 0 and removed by a power of D before returning to f(z).
    """
    from geops.solutions import frobenius_basis

    psi = fourier_laplace(Phi)
    remainder = -1
    try:
        basis = frobenius_basis(Phi, 0, N)
        candidates = [s for s in basis.solutions if s.log_degree == 0 and s.exponent >= 0
                      and s.exponent.denominator == 1]
    except PreconditionError:
        candidates = []
    for s in candidates:
        F = [s.series.coefficient(n) for n in range(N + 1)]
        image = apply(psi, laplace_series(F))
        for e, _, c in image.terms():
            if e >= 0 and c != 0:
                remainder = max(remainder, int(e))
    if remainder >= 0:
        psi = DiffOp.d() ** (remainder + 1) * psi
        logger.debug("constant-term obstruction of degree %d: prepended D^%d", remainder, remainder + 1)
    G = strip_z(invert(psi) * DiffOp.z()).normalized()
    logger.info("G-operator %s from Phi = %s", G, Phi)
    return G


def recalibrate(phi: DiffOp, s: Scalar) -> DiffOp:
    """Annihilator of y(z^{-s}) for the solutions y of phi, s = p/q."""
    s = as_rat(s)
    if s == 0:
        raise PreconditionError("recalibration order must be nonzero")
    p, q = abs(s.numerator), s.denominator
    op = phi if s < 0 else invert(phi)
    try:
        op = descend(ramify(op, p), q)
    except DescentError as e:
        raise DescentError(
            f"{e}; the general case needs the LCLM over the conjugates z -> eps*z, which is not implemented"
        ) from None
    logger.info("recalibrated by s=%s: %s", rat_str(s), op)
    return op.normalized()

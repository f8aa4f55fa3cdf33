"""
Formal solution bases.

Frobenius bases come from one engine working on the theta-slices of an
operator: with  z^m phi = sum_s z^s P_s(theta)  the coefficient vectors
C_n = (c_{n,0}, ..., c_{n,K}) of  z^beta sum_n sum_k c_{n,k} z^n log^k z
satisfy

    P_0(beta + n + D) C_n = - sum_{s>=1} P_s(beta + n - s + D) C_{n-s}

where D acts on log-coefficient vectors as the derivative in log z.
Every coefficient is carried as a linear form in free parameters; the
parameters left free by the consistency conditions span the basis.
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import sympy
from sympy import QQ
from sympy.polys.matrices import DomainMatrix

from geops.errors import BadPrimeError, PreconditionError
from geops.kernel import Poly, Scalar, as_rat, rat_str, rational_roots
from geops.newton import INFINITY, exponents, is_E_shape, local_polygon, polygon
from geops.opalg import DiffOp, apply, fourier_laplace, invert, theta_form, translate, twist_exp
from geops.series import Branch, PuiseuxLogSeries, exponent_class

logger = logging.getLogger(__name__)


@dataclass
class FormalSolution:
    """
    e^{-zeta z} * series.  `exponent` is the leading local exponent: in z - a
    at a finite point, in w = 1/z at infinity.
    """

    zeta: Fraction
    exponent: Fraction
    log_degree: int
    series: PuiseuxLogSeries


@dataclass
class FormalSolutionBasis:
    at: str
    order: int
    truncation: int
    solutions: list = field(default_factory=list)
    deficient: bool = False
    notes: list = field(default_factory=list)

    @property
    def grouping(self) -> dict:
        out: dict = {}
        for s in self.solutions:
            out.setdefault(s.zeta, []).append(s)
        return out

    def exponents(self, zeta: Scalar = 0) -> list:
        return [s.exponent for s in self.solutions if s.zeta == as_rat(zeta)]


# ---------------------------------------------------------------------------
# Frobenius engine
# ---------------------------------------------------------------------------
def _slices(phi: DiffOp) -> list:
    sl = theta_form(phi)[0].z_slices()
    low = min(sl)
    return [sl.get(low + s, Poly()) for s in range(max(sl) - low + 1)]


def _axpy(acc: dict, c: Fraction, v: dict) -> None:
    if c == 0:
        return
    for i, x in v.items():
        y = acc.get(i, Fraction(0)) + c * x
        if y:
            acc[i] = y
        else:
            acc.pop(i, None)


def _rising(k: int, l: int) -> int:
    return math.prod(range(k + 1, k + l + 1))


def _apply_in_log(taylor: tuple, C: list) -> list:
    """sum_l taylor[l] D^l applied to a log-coefficient vector of linear forms."""
    K = len(C) - 1
    out = [dict() for _ in range(K + 1)]
    for l, t in enumerate(taylor):
        if t == 0:
            continue
        for k in range(K + 1 - l):
            _axpy(out[k], t * _rising(k, l), C[k + l])
    return out


def _solve_class(P: list, base: Fraction, offsets: dict, N: int) -> list:
    """
    Solutions z^base * (...) for one class of indicial roots; offsets maps
    integer offsets from `base` to multiplicities.
    """
    K = sum(offsets.values()) - 1
    top = max(N, max(offsets))
    S = len(P) - 1
    C: list = []
    constraints: list = []
    params = 0
    for n in range(top + 1):
        rhs = [dict() for _ in range(K + 1)]
        for s in range(1, min(S, n) + 1):
            if P[s].is_zero():
                continue
            contrib = _apply_in_log(P[s].shift(base + n - s).coeffs, C[n - s])
            for k in range(K + 1):
                _axpy(rhs[k], Fraction(-1), contrib[k])
        t = P[0].shift(base + n).coeffs
        m = offsets.get(n, 0)
        for k in range(K - m + 1, K + 1):
            if rhs[k]:
                constraints.append(rhs[k])
        w = [dict() for _ in range(K + 1)]
        for k in range(m):
            w[k] = {params: Fraction(1)}
            params += 1
        for k in range(m, K + 1):
            _axpy(w[k], Fraction(1, _rising(k - m, m)), rhs[k - m])
        u = t[m:]
        c = [dict() for _ in range(K + 1)]
        for k in range(K, -1, -1):
            acc = dict(w[k])
            for l in range(1, len(u)):
                if k + l <= K:
                    _axpy(acc, -u[l] * _rising(k, l), c[k + l])
            c[k] = {i: x / u[0] for i, x in acc.items()}
        C.append(c)

    if constraints:
        M = DomainMatrix(
            [[QQ(v.get(i, Fraction(0)).numerator, v.get(i, Fraction(0)).denominator) for i in range(params)]
             for v in constraints],
            (len(constraints), params), QQ,
        )
        null = M.nullspace().to_Matrix()
        combos = [[Fraction(int(x.p), int(x.q)) for x in null.row(r)] for r in range(null.rows)]
    else:
        combos = [[Fraction(int(i == j)) for i in range(params)] for j in range(params)]
    logger.debug("class base %s: %d parameters, %d constraints, %d solutions",
                 base, params, len(constraints), len(combos))

    out = []
    for lam in combos:
        rows = []
        for c in C:
            rows.append(tuple(sum((lam[i] * x for i, x in ck.items()), Fraction(0)) for ck in c))
        lead = next((r[k] for r in rows for k in range(len(r) - 1, -1, -1) if r[k] != 0), None)
        if lead is None:
            continue
        rows = [tuple(x / lead for x in r) for r in rows]
        out.append(Branch(base, tuple(rows)))
    return out


def _formal_solutions(phi: DiffOp, N: int, notes: list) -> tuple[list, bool]:
    """All formal solutions at 0 attached to the slope-0 edge."""
    P = _slices(phi)
    if P[0].degree < 1:
        return [], False
    roots, rest = rational_roots(P[0])
    deficient = rest.degree > 0
    if deficient:
        notes.append(f"non-rational indicial factor {rest.to_str('X')}")
        logger.warning("indicial polynomial does not split over Q: %s", rest.to_str("X"))
    classes: dict = {}
    for r, mult in roots.items():
        classes.setdefault(exponent_class(r), {})[r] = mult
    branches = []
    for cls in sorted(classes):
        members = classes[cls]
        base = min(members)
        offsets = {int(r - base): mult for r, mult in members.items()}
        branches.extend(_solve_class(P, base, offsets, N))
    return branches, deficient


def _leading_exponent(b: Branch) -> Fraction:
    n = next(n for n, r in enumerate(b.rows) if any(c != 0 for c in r))
    return b.base + n


def frobenius_basis(phi: DiffOp, point: Scalar = 0, N: int = 20) -> FormalSolutionBasis:
    a = as_rat(point)
    local = translate(phi, a) if a != 0 else phi
    if local_polygon(local, Poly.x()).slopes_at_zero():
        raise PreconditionError(f"{rat_str(a)} is an irregular singular point; no Frobenius basis there")
    variable = "z" if a == 0 else f"(z - {rat_str(a)})" if a > 0 else f"(z + {rat_str(-a)})"
    basis = FormalSolutionBasis(rat_str(a), phi.order, N)
    branches, basis.deficient = _formal_solutions(local, N, basis.notes)
    for b in branches:
        series = PuiseuxLogSeries((b,), 1, variable)
        basis.solutions.append(FormalSolution(Fraction(0), _leading_exponent(b), b.log_degree, series))
    if len(basis.solutions) != phi.order:
        basis.deficient = True
    return basis


# ---------------------------------------------------------------------------
# Exponential parts at infinity
# ---------------------------------------------------------------------------
def exponential_parts(Phi: DiffOp) -> tuple[dict, Poly]:
    """Rational roots (with multiplicity) of the leading coefficient of the symmetrized FL transform."""
    F = fourier_laplace(Phi, symmetrized=True)
    if F.leading.degree < 1:
        return {}, Poly.const(1)
    return rational_roots(F.leading)


def infinity_basis(Phi: DiffOp, N: int = 20) -> FormalSolutionBasis:
    """
    Solutions e^{-zeta z} z^{-alpha} sum c_{n,k} z^{-n} log^k z.  For each
    exponential part zeta the twisted operator twist_exp(Phi, zeta)
    annihilates the series factor; it is solved in w = 1/z.
    """
    slopes = polygon(Phi).slopes_at_infinity()
    bad = [s for s in slopes if s != 1]
    if bad:
        raise PreconditionError(
            "slopes at infinity must lie in {0, 1}, got " + ", ".join(str(s) for s in sorted(bad))
        )
    basis = FormalSolutionBasis(INFINITY, Phi.order, N)
    parts, rest = exponential_parts(Phi)
    if rest.degree > 0:
        basis.deficient = True
        basis.notes.append(f"exponential parts at the roots of {rest.to_str('z')} are not rational")
        logger.warning("irrational exponential parts skipped: %s", rest.to_str("z"))
    for zeta in sorted(parts):
        twisted = twist_exp(Phi, zeta)
        branches, deficient = _formal_solutions(invert(twisted), N, basis.notes)
        if deficient:
            basis.deficient = True
        if len(branches) != parts[zeta]:
            basis.notes.append(
                f"part {rat_str(zeta)}: {len(branches)} solutions for multiplicity {parts[zeta]}"
            )
        for b in branches:
            series = PuiseuxLogSeries((b,), 1, "z").log_to_inverse_variable()
            basis.solutions.append(FormalSolution(zeta, _leading_exponent(b), b.log_degree, series))
    if len(basis.solutions) != Phi.order:
        basis.deficient = True
    return basis


def solution_residual(phi: DiffOp, solution: FormalSolution, at=0) -> PuiseuxLogSeries:
    """phi applied to the series part; zero on every exact row for a true solution."""
    if isinstance(at, str) and at == INFINITY:
        op = twist_exp(phi, solution.zeta) if solution.zeta != 0 else phi
    else:
        a = as_rat(at)
        op = translate(phi, a) if a != 0 else phi
    return apply(op, solution.series)


def verify_basis(phi: DiffOp, basis: FormalSolutionBasis) -> bool:
    at = basis.at if basis.at == INFINITY else Fraction(basis.at)
    bad = [s for s in basis.solutions if not solution_residual(phi, s, at).is_zero()]
    for s in bad:
        logger.warning("basis member with exponent %s at %s fails the apply check", rat_str(s.exponent), basis.at)
    return not bad


# ---------------------------------------------------------------------------
# p-curvature
# ---------------------------------------------------------------------------
@dataclass
class PCurvatureReport:
    p: int
    matrix: list
    nilpotent: bool
    nilpotency_index: Optional[int]

    @property
    def is_zero(self) -> bool:
        return self.nilpotency_index == 1


_Z = sympy.Symbol("z")


def _mod_poly(q: Poly, p: int) -> sympy.Poly:
    coeffs = []
    for c in reversed(q.coeffs):
        if c.denominator % p == 0:
            raise BadPrimeError(p, f"a coefficient denominator is divisible by {p}")
        coeffs.append(c.numerator * pow(c.denominator, -1, p) % p)
    return sympy.Poly(coeffs or [0], _Z, modulus=p)


def _mat_mul(A, B, zero):
    n = len(A)
    out = [[zero for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for k in range(n):
            if A[i][k].is_zero:
                continue
            for j in range(n):
                out[i][j] = out[i][j] + A[i][k] * B[k][j]
    return out


def _is_zero_matrix(A) -> bool:
    return all(x.is_zero for row in A for x in row)


def _fraction_str(num, den) -> str:
    if num.is_zero:
        return "0"
    g = num.gcd(den)
    num, den = num.quo(g), den.quo(g)
    top = str(num.as_expr())
    if den.degree() == 0 and den.as_expr() == 1:
        return top
    return f"({top})/({den.as_expr()})"


def p_curvature(phi: DiffOp, p: int) -> PCurvatureReport:
    """
    Matrix of D^p on the basis 1, D, ..., D^{mu-1} of the solution module
    mod p.  With q the leading coefficient the k-th power is B_k / q^k and
    B_{k+1} = q B_k' - k q' B_k + C B_k for the polynomial companion C.
    """
    if not sympy.isprime(p):
        raise PreconditionError(f"{p} is not prime")
    phi = phi.normalized()
    mu = phi.order
    if mu < 1:
        raise PreconditionError("p-curvature needs an operator of positive order")
    Q = [_mod_poly(r, p) for r in phi.rows]
    q = Q[mu]
    if q.is_zero:
        raise BadPrimeError(p, f"leading coefficient {phi.leading.to_str('z')} vanishes mod {p}")
    zero = sympy.Poly(0, _Z, modulus=p)
    one = sympy.Poly(1, _Z, modulus=p)
    C = [[zero for _ in range(mu)] for _ in range(mu)]
    for i in range(mu):
        if i + 1 < mu:
            C[i + 1][i] = q
        C[i][mu - 1] = C[i][mu - 1] - Q[i]
    dq = q.diff(_Z)
    B = [[one if i == j else zero for j in range(mu)] for i in range(mu)]
    for k in range(p):
        CB = _mat_mul(C, B, zero)
        B = [[q * B[i][j].diff(_Z) - dq * B[i][j] * k + CB[i][j] for j in range(mu)] for i in range(mu)]

    index = None
    power = B
    for j in range(1, mu + 1):
        if _is_zero_matrix(power):
            index = j
            break
        power = _mat_mul(power, B, zero)
    den = q ** p
    matrix = [[_fraction_str(B[i][j], den) for j in range(mu)] for i in range(mu)]
    logger.debug("p-curvature mod %d: nilpotency index %s", p, index)
    return PCurvatureReport(p, matrix, index is not None, index)


# ---------------------------------------------------------------------------
# Exponent duality
# ---------------------------------------------------------------------------
def _noninteger_classes(roots) -> set:
    return {exponent_class(r) for r in roots if as_rat(r).denominator != 1}


@dataclass
class DualityReport:
    ok: bool
    at_zero: dict
    parts: list
    deficient: bool = False
    notes: list = field(default_factory=list)


def duality_exponent_check(Phi: DiffOp, N: int = 8) -> DualityReport:
    """
    (a) non-integer exponents of Phi at 0 against those of its symmetrized
    FL transform at infinity, modulo Z; (b) for each rational singularity
    zeta of the transform, Turrittin exponents of the zeta-part against the
    local exponents of the transform at zeta.
    """
    shape = is_E_shape(Phi)
    if not shape.ok:
        raise PreconditionError("duality check needs an E-shaped operator: " + "; ".join(shape.reasons))
    F = fourier_laplace(Phi, symmetrized=True)
    notes: list = []
    deficient = False

    left, rest0 = exponents(Phi, 0)
    right, rest_inf = exponents(F, INFINITY)
    if rest0.degree > 0 or rest_inf.degree > 0:
        deficient = True
        notes.append("non-rational exponents on one side of check (a)")
    a_left, a_right = _noninteger_classes(left), _noninteger_classes(right)
    at_zero = {
        "phi_at_0": sorted(a_left),
        "transform_at_infinity": sorted(a_right),
        "equal": a_left == a_right,
    }

    basis = infinity_basis(Phi, N)
    deficient = deficient or basis.deficient
    notes.extend(basis.notes)
    parts = []
    for zeta, sols in sorted(basis.grouping.items()):
        turrittin = _noninteger_classes(s.exponent for s in sols)
        local, rest = exponents(F, zeta)
        if rest.degree > 0:
            deficient = True
        local_classes = _noninteger_classes(local)
        parts.append({
            "zeta": zeta,
            "turrittin": sorted(turrittin),
            "transform_at_zeta": sorted(local_classes),
            "equal": turrittin == local_classes,
        })
    ok = at_zero["equal"] and all(p["equal"] for p in parts)
    if not ok:
        logger.warning("exponent duality fails for %s", Phi)
    return DualityReport(ok, at_zero, parts, deficient, notes)

"""
Newton polygons, local slopes, singularity inventory and indicial data.

The global polygon of phi = sum a_ij z^j D^i is the convex hull of the
leftward half-lines {u <= i, v = j - i}.  Its lower chain carries the
positive slopes (irregularity at 0), its upper chain the negative slopes
(irregularity at infinity, reported as positive numbers).
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

from geops.errors import PreconditionError
from geops.kernel import Poly, factor_list, rational_roots, valuation_at
from geops.opalg import DiffOp, invert, theta_form, translate

logger = logging.getLogger(__name__)

INFINITY = "inf"
Point = Union[Fraction, int, str]

UPPER, LOWER = "upper", "lower"


@dataclass(frozen=True)
class Edge:
    slope: Fraction
    length: int
    side: str

    @property
    def label(self) -> str:
        if self.slope == 0:
            return "-0" if self.side == UPPER else "+0"
        return str(self.slope)


def _cross(o, a, b) -> Fraction:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _chain(columns: dict, upper: bool) -> tuple:
    pick = max if upper else min
    extreme = pick(columns.values())
    start = max(u for u, v in columns.items() if v == extreme)
    hull: list = []
    for u in sorted(c for c in columns if c >= start):
        p = (u, columns[u])
        while len(hull) >= 2 and (_cross(hull[-2], hull[-1], p) >= 0 if upper else _cross(hull[-2], hull[-1], p) <= 0):
            hull.pop()
        hull.append(p)
    return tuple(hull)


@dataclass(frozen=True)
class NewtonPolygon:
    upper: tuple
    lower: tuple

    @classmethod
    def from_points(cls, points) -> "NewtonPolygon":
        hi: dict = {}
        lo: dict = {}
        for u, v in points:
            hi[u] = max(hi.get(u, v), v)
            lo[u] = min(lo.get(u, v), v)
        if not hi:
            return cls((), ())
        return cls(_chain(hi, True), _chain(lo, False))

    @property
    def vertices(self) -> tuple:
        return tuple(sorted(set(self.upper) | set(self.lower)))

    @property
    def edges(self) -> tuple:
        out = []
        for chain, side in ((self.upper, UPPER), (self.lower, LOWER)):
            if not chain:
                continue
            if chain[0][0] > 0:
                out.append(Edge(Fraction(0), chain[0][0], side))
            for (u0, v0), (u1, v1) in zip(chain, chain[1:]):
                out.append(Edge(Fraction(v1 - v0, u1 - u0), u1 - u0, side))
        return tuple(out)

    def slopes_at_zero(self) -> dict:
        return {e.slope: e.length for e in self.edges if e.side == LOWER and e.slope > 0}

    def slopes_at_infinity(self) -> dict:
        return {-e.slope: e.length for e in self.edges if e.side == UPPER and e.slope < 0}


def polygon(phi: DiffOp) -> NewtonPolygon:
    if phi.is_zero():
        raise PreconditionError("polygon of the zero operator")
    return NewtonPolygon.from_points((i, j - i) for i, j, _ in phi.terms())


def fl_polygon_map(N: NewtonPolygon) -> NewtonPolygon:
    """
    (u, v) -> (u + v, -v).  An edge of slope t becomes one of slope -t/(t+1);
    a slope -1 edge becomes the vertical right side of the image.
    """
    if any(e.slope == -1 for e in N.edges):
        logger.warning("slope -1 edge is not of exponential type; mapped to a vertical side")
    pts = [(u + v, -v) for u, v in set(N.upper) | set(N.lower)]
    return NewtonPolygon.from_points(pts)


def local_polygon(phi: DiffOp, factor: Poly) -> NewtonPolygon:
    """Polygon at the zeros of an irreducible factor, from valuations of the Q_i."""
    pts = [(i, valuation_at(q, factor) - i) for i, q in enumerate(phi.rows) if not q.is_zero()]
    return NewtonPolygon.from_points(pts)


# ---------------------------------------------------------------------------
# Indicial data
# ---------------------------------------------------------------------------
def _is_infinity(point: Point) -> bool:
    return isinstance(point, str) and point == INFINITY


def indicial_polynomial(phi: DiffOp, point: Point = 0) -> Poly:
    """
    Slope-0 edge polynomial in the local theta-form; roots are the local
    exponents (in w = 1/z at infinity).
    """
    if _is_infinity(point):
        slices = theta_form(phi)[0].z_slices()
        P = slices[max(slices)].reflect()
    else:
        a = Fraction(point)
        local = translate(phi, a) if a != 0 else phi
        slices = theta_form(local)[0].z_slices()
        P = slices[min(slices)]
    if P.degree < 1:
        raise PreconditionError(f"no slope-0 edge at {point}: the local structure is purely irregular")
    return P


def exponents(phi: DiffOp, point: Point = 0) -> tuple[dict, Poly]:
    """Rational local exponents with multiplicities and the non-split remainder."""
    return rational_roots(indicial_polynomial(phi, point))


# ---------------------------------------------------------------------------
# Singularities
# ---------------------------------------------------------------------------
@dataclass
class PointReport:
    factor: Optional[Poly]
    root: Optional[Fraction]
    multiplicity: int
    classification: str
    slopes: dict = field(default_factory=dict)
    exponents: Optional[dict] = None
    indicial_remainder: Optional[Poly] = None
    note: str = ""

    @property
    def regular(self) -> bool:
        return self.classification in ("trivial", "regular")

    @property
    def location(self) -> str:
        if self.factor is None:
            return INFINITY
        if self.root is not None:
            return str(self.root)
        return self.factor.to_str("z")


@dataclass
class SingularityReport:
    finite: list
    infinity: PointReport

    def point(self, a) -> Optional[PointReport]:
        a = Fraction(a)
        return next((p for p in self.finite if p.root == a), None)

    def nontrivial(self) -> list:
        pts = [p for p in self.finite if p.classification != "trivial"]
        if self.infinity.classification != "trivial":
            pts.append(self.infinity)
        return pts


def _exponent_data(phi: DiffOp, point: Point):
    try:
        roots, rest = exponents(phi, point)
    except PreconditionError:
        return None, None
    return roots, (rest if rest.degree > 0 else None)


def _is_trivial(phi: DiffOp, a: Fraction, roots: dict, rest: Optional[Poly], N: int) -> bool:
    if rest is not None or sum(roots.values()) != phi.order:
        return False
    if any(m > 1 or r < 0 or r.denominator != 1 for r, m in roots.items()):
        return False
    from geops.solutions import frobenius_basis

    basis = frobenius_basis(phi, a, N)
    return not basis.deficient and len(basis.solutions) == phi.order and all(
        s.log_degree == 0 for s in basis.solutions
    )


def singularities(phi: DiffOp, N: int = 12) -> SingularityReport:
    if phi.order < 1:
        raise PreconditionError("singularities needs an operator of positive order")
    finite = []
    for factor, mult in factor_list(phi.leading):
        slopes = local_polygon(phi, factor).slopes_at_zero()
        cls = "irregular" if slopes else "regular"
        if factor.degree == 1:
            a = -factor.coeffs[0]
            roots, rest = (None, None)
            if cls == "regular":
                roots, rest = _exponent_data(phi, a)
                if roots is not None and _is_trivial(phi, a, roots, rest, N):
                    cls = "trivial"
            finite.append(PointReport(factor, a, mult, cls, slopes, roots, rest))
        else:
            finite.append(PointReport(factor, None, mult, cls, slopes,
                                      note="non-rational point: classification only"))
    inf_slopes = polygon(phi).slopes_at_infinity()
    if inf_slopes:
        infinity = PointReport(None, None, 0, "irregular", inf_slopes)
    else:
        roots, rest = _exponent_data(phi, INFINITY)
        cls = "regular"
        # same test as at a finite point, run on the operator in w = 1/z
        if roots is not None and _is_trivial(invert(phi), Fraction(0), roots, rest, N):
            cls = "trivial"
        infinity = PointReport(None, None, 0, cls, {}, roots, rest)
    logger.debug("singularities of %s: %d finite", phi, len(finite))
    return SingularityReport(finite, infinity)


def is_fuchsian(phi: DiffOp) -> bool:
    rep = singularities(phi)
    return all(p.regular for p in rep.finite) and rep.infinity.regular


@dataclass
class EShapeReport:
    ok: bool
    reasons: list
    slopes_at_infinity: dict
    exponents_at_zero: Optional[dict]


def is_E_shape(Phi: DiffOp) -> EShapeReport:
    reasons = []
    finite = [f for f, _ in factor_list(Phi.leading)]
    stray = [f for f in finite if f != Poly.x()]
    if stray:
        reasons.append("finite singularities outside 0: " + ", ".join(f.to_str("z") for f in stray))
    ok_zero = True
    roots = None
    if Poly.x() in finite and local_polygon(Phi, Poly.x()).slopes_at_zero():
        ok_zero = False
        reasons.append("0 is an irregular singularity")
    else:
        try:
            roots, rest = exponents(Phi, 0)
            if rest.degree > 0:
                ok_zero = False
                reasons.append(f"non-rational exponents at 0: factor {rest}")
        except PreconditionError as e:
            ok_zero = False
            reasons.append(str(e))
    slopes = polygon(Phi).slopes_at_infinity()
    bad = [s for s in slopes if s not in (0, 1)]
    if bad:
        reasons.append("slopes at infinity outside {0, 1}: " + ", ".join(str(s) for s in bad))
    ok = not stray and ok_zero and not bad
    return EShapeReport(ok, reasons, slopes, roots)


def irregularity_accounting(phi: DiffOp) -> dict:
    """
    Per location: order minus indicial degree, against the total length of
    the sloped edges there.  Both sides must agree.
    """
    out = {}
    theta = theta_form(phi)[0].z_slices()
    top_degree = theta[max(theta)].degree
    out[INFINITY] = (phi.order - top_degree, sum(polygon(phi).slopes_at_infinity().values()))
    for factor, _ in factor_list(phi.leading):
        if factor.degree != 1:
            continue
        a = -factor.coeffs[0]
        local = theta_form(translate(phi, a))[0].z_slices()
        defect = phi.order - local[min(local)].degree
        out[str(a)] = (defect, sum(local_polygon(phi, factor).slopes_at_zero().values()))
    return out

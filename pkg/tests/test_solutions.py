"""
Unit tests for geops/solutions.py (Frobenius and infinity bases, apply
checks, p-curvature, exponent duality).

Run from project root:
    pytest tests/test_solutions.py -v
"""
import math
import sys
import os
import pytest
from fractions import Fraction

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

EULER = "z*D^2 + (1 - z)*D - 1"
WHITTAKER = "z^2*D^2 - 1/4*z^2 + 2*z + 1/4 - 1/9"
GAUSS = "z*(1 - z)*D^2 + (1 - 11/6*z)*D - 1/6"


def op(text):
    from geops.parser import parse_diffop
    return parse_diffop(text)


# ---------------------------------------------------------------------------
# Frobenius bases
# ---------------------------------------------------------------------------
class TestFrobeniusBasis:

    def test_exponential(self):
        from geops.solutions import frobenius_basis
        basis = frobenius_basis(op("D - 1"), 0, 10)
        assert len(basis.solutions) == 1
        s = basis.solutions[0]
        assert s.exponent == 0
        assert s.log_degree == 0
        assert [s.series.coefficient(n) for n in range(6)] == [Fraction(1, math.factorial(n)) for n in range(6)]
        assert not basis.deficient

    def test_whittaker_exponents(self):
        from geops.solutions import frobenius_basis, verify_basis
        A = op(WHITTAKER)
        basis = frobenius_basis(A, 0, 15)
        assert sorted(s.exponent for s in basis.solutions) == [Fraction(1, 6), Fraction(5, 6)]
        assert verify_basis(A, basis)

    def test_double_root_brings_a_log(self):
        from geops.solutions import frobenius_basis, verify_basis
        A = op(EULER)
        basis = frobenius_basis(A, 0, 12)
        assert sorted(s.log_degree for s in basis.solutions) == [0, 1]
        plain = next(s for s in basis.solutions if s.log_degree == 0)
        assert plain.series.coefficient(5) == Fraction(1, 120)
        assert verify_basis(A, basis)

    def test_basis_at_finite_point(self):
        from geops.solutions import frobenius_basis, verify_basis
        A = op(GAUSS)
        basis = frobenius_basis(A, 1, 10)
        assert basis.at == "1"
        assert sorted(basis.exponents()) == [0, Fraction(1, 6)]
        assert basis.solutions[0].series.variable == "(z - 1)"
        assert verify_basis(A, basis)

    def test_irregular_point_raises(self):
        from geops.solutions import frobenius_basis
        from geops.errors import PreconditionError
        with pytest.raises(PreconditionError):
            frobenius_basis(op("z^2*D - 1"), 0, 5)

    def test_irrational_exponents_make_basis_deficient(self):
        from geops.solutions import frobenius_basis
        basis = frobenius_basis(op("z^2*D^2 - 1"), 0, 5)
        assert basis.deficient
        assert basis.notes

    def test_residual_of_wrong_series_is_nonzero(self):
        from geops.solutions import FormalSolution, solution_residual
        from geops.series import PuiseuxLogSeries
        bogus = FormalSolution(Fraction(0), Fraction(0), 0, PuiseuxLogSeries.power_series([1, 1, 1, 1]))
        assert not solution_residual(op("D - 1"), bogus).is_zero()


# ---------------------------------------------------------------------------
# Bases at infinity
# ---------------------------------------------------------------------------
class TestInfinityBasis:

    def test_euler_parts(self):
        from geops.solutions import infinity_basis, verify_basis
        A = op(EULER)
        basis = infinity_basis(A, 20)
        assert set(basis.grouping) == {Fraction(0), Fraction(-1)}
        assert len(basis.solutions) == 2
        assert verify_basis(A, basis)

    def test_euler_divergent_series(self):
        from geops.solutions import infinity_basis
        basis = infinity_basis(op(EULER), 20)
        series = basis.grouping[Fraction(0)][0].series
        assert series.direction == -1
        # sum (-1)^n n! z^{-n-1}
        for n in range(10):
            assert series.coefficient(-n - 1) == (-1) ** n * math.factorial(n)

    def test_exponential_parts(self):
        from geops.solutions import exponential_parts
        parts, rest = exponential_parts(op(EULER))
        assert parts == {Fraction(0): 1, Fraction(-1): 1}
        assert rest.degree == 0

    def test_repeated_exponential(self):
        from geops.solutions import infinity_basis, verify_basis
        # (D - 1)^2 kills e^z and z e^z; both sit in the part of e^{+z}
        A = op("D^2 - 2*D + 1")
        basis = infinity_basis(A, 10)
        assert set(basis.grouping) == {Fraction(-1)}
        assert len(basis.solutions) == 2
        assert verify_basis(A, basis)

    def test_steep_slope_raises(self):
        from geops.solutions import infinity_basis
        from geops.errors import PreconditionError
        with pytest.raises(PreconditionError):
            infinity_basis(op("D^2 - z"), 10)


# ---------------------------------------------------------------------------
# p-curvature
# ---------------------------------------------------------------------------
class TestPCurvature:

    def test_derivative_has_zero_p_curvature(self):
        from geops.solutions import p_curvature
        assert p_curvature(op("D"), 5).is_zero

    def test_exponential_has_nonzero_p_curvature(self):
        from geops.solutions import p_curvature
        report = p_curvature(op("D - 1"), 7)
        assert not report.is_zero
        assert not report.nilpotent
        assert report.matrix == [["1"]]

    def test_algebraic_solution(self):
        from geops.solutions import p_curvature
        # 2 z D - 1 kills sqrt(z)
        for p in (3, 5, 7):
            assert p_curvature(op("2*z*D - 1"), p).is_zero

    def test_non_prime(self):
        from geops.solutions import p_curvature
        from geops.errors import PreconditionError
        with pytest.raises(PreconditionError):
            p_curvature(op("D"), 4)

    def test_bad_prime(self):
        from geops.solutions import p_curvature
        from geops.errors import BadPrimeError
        with pytest.raises(BadPrimeError) as exc:
            p_curvature(op("3*D - 1"), 3)
        assert exc.value.p == 3


# ---------------------------------------------------------------------------
# Exponent duality
# ---------------------------------------------------------------------------
class TestDuality:

    def test_whittaker(self):
        from geops.solutions import duality_exponent_check
        report = duality_exponent_check(op(WHITTAKER))
        assert report.ok
        assert report.at_zero["equal"]

    def test_requires_e_shape(self):
        from geops.solutions import duality_exponent_check
        from geops.errors import PreconditionError
        with pytest.raises(PreconditionError):
            duality_exponent_check(op("D^2 - z"))

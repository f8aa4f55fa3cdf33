"""
Unit tests for geops/mellin.py

Run from project root:
    pytest tests/test_mellin.py -v
"""
import logging
import math
import sys
import os
import pytest
from fractions import Fraction

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

GAUSS = "z*(1 - z)*D^2 + (1 - 11/6*z)*D - 1/6"
CUBE_ROOT = "3*z*D^2 + 2*D"


# ---------------------------------------------------------------------------
# Operators
# ---------------------------------------------------------------------------
class TestMellinOperator:

    def test_generators(self):
        from geops.mellin import mellin_operator
        from geops.opalg import DiffOp, DifferenceOp
        from geops.kernel import Poly
        assert mellin_operator(DifferenceOp.delta()) == DiffOp.of_poly(Poly.linear(-1))
        assert mellin_operator(DifferenceOp.x()) == -(DiffOp.z() * DiffOp.d())

    def test_commutator_maps_to_z(self):
        from geops.mellin import mellin_operator
        from geops.opalg import DiffOp, DifferenceOp
        X, Delta = DifferenceOp.x(), DifferenceOp.delta()
        assert mellin_operator(Delta * X - X * Delta) == DiffOp.z()

    def test_round_trip(self):
        from geops.mellin import inverse_mellin_operator, mellin_operator
        from geops.parser import parse_operator
        for text in ("x", "Delta", "x*Delta^2 + (x^2 - 1)*Delta + 3"):
            X = parse_operator(text)
            assert inverse_mellin_operator(mellin_operator(X)) == X, text

    def test_multiplicative_on_random_operators(self):
        import random
        from geops.cli import _random_difference_op
        from geops.mellin import inverse_mellin_operator, mellin_operator
        rng = random.Random(7)
        for _ in range(100):
            X, Y = _random_difference_op(rng), _random_difference_op(rng)
            assert mellin_operator(X * Y) == mellin_operator(X) * mellin_operator(Y), f"{X} | {Y}"
            assert inverse_mellin_operator(mellin_operator(X)) == X, str(X)

    def test_preimage_outside_image_warns(self, caplog):
        from geops.mellin import inverse_mellin_operator
        from geops.opalg import DiffOp, DifferenceOp
        with caplog.at_level(logging.WARNING, logger="geops.mellin"):
            X = inverse_mellin_operator(DiffOp.d())
        assert X == -DifferenceOp.x()
        assert "not in the Mellin image" in caplog.text


# ---------------------------------------------------------------------------
# Factorial series
# ---------------------------------------------------------------------------
class TestFactorialSeries:

    def test_negative_integer_rho_needs_opt_in(self):
        from geops.mellin import FactorialSeries
        from geops.errors import PreconditionError
        with pytest.raises(PreconditionError):
            FactorialSeries(-2, (1,))
        assert FactorialSeries(-2, (1,), allow_negative_integer=True).N == 0

    def test_series_image(self):
        from geops.mellin import SERIES_VARIABLE, FactorialSeries, mellin_series
        h = mellin_series(FactorialSeries(0, (1, 1, 1)))
        assert h.variable == SERIES_VARIABLE
        assert [h.coefficient(n) for n in range(3)] == [1, 1, Fraction(1, 2)]

    def test_gevrey_check_shifts_order(self):
        from geops.mellin import FactorialSeries, factorial_gevrey_check
        g = FactorialSeries(0, tuple(math.factorial(n) for n in range(81)))
        report = factorial_gevrey_check(g, 0)
        assert report.s == 1
        assert report.bounded


class TestNicole:

    def test_forward(self):
        from geops.mellin import nicole_convert
        # B(z) = z, A(w) = 1 - e^{-w}
        assert nicole_convert([0, 1, 0, 0]) == [0, 1, -1, 1]

    def test_reverse(self):
        from geops.mellin import nicole_convert
        assert nicole_convert([0, 1, -1, 1], reverse=True) == [0, 1, 0, 0]

    def test_nonzero_rho(self):
        from geops.mellin import nicole_convert
        from geops.errors import PreconditionError
        with pytest.raises(PreconditionError):
            nicole_convert([1, 2], rho=Fraction(1, 2))


class TestFromFrobenius:

    def test_gauss_at_one(self):
        from geops.mellin import factorial_series_from_frobenius
        from geops.parser import parse_diffop
        g = factorial_series_from_frobenius(parse_diffop(GAUSS), Fraction(1, 6), 10)
        assert g.rho == Fraction(1, 6)
        assert g.coeffs[0] == 1
        assert g.N == 10

    def test_missing_exponent(self):
        from geops.mellin import factorial_series_from_frobenius
        from geops.parser import parse_diffop
        from geops.errors import PreconditionError
        with pytest.raises(PreconditionError):
            factorial_series_from_frobenius(parse_diffop(GAUSS), Fraction(1, 2), 10)

    def test_fixture_pair_verdicts_agree(self):
        from geops.mellin import fixture_pair_check
        from geops.parser import parse_diffop
        # solutions 1 and z^{1/3}: exponents 0 and 1 at z = 1
        result = fixture_pair_check(parse_diffop(CUBE_ROOT), 0, 1, 0, 60)
        assert result["agree"]
        assert result["rho"].window[1] == 60
        assert result["rho_prime"].bounded

    def test_fixture_pair_needs_integer_gap(self):
        from geops.mellin import fixture_pair_check
        from geops.parser import parse_diffop
        from geops.errors import PreconditionError
        with pytest.raises(PreconditionError):
            fixture_pair_check(parse_diffop(GAUSS), 0, Fraction(1, 6), 0, 60)

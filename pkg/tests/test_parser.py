"""
Unit tests for geops/parser.py

Run from project root:
    pytest tests/test_parser.py -v
"""
import sys
import os
import pytest
from fractions import Fraction

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))


class TestParseOperator:

    def test_airy(self):
        from geops.parser import parse_diffop
        from geops.opalg import DiffOp
        from geops.kernel import Poly
        assert parse_diffop("D^2 - z") == DiffOp((Poly((0, -1)), Poly(), Poly.const(1)))

    def test_products_expand_with_commutation(self):
        from geops.parser import parse_diffop
        assert parse_diffop("D*z") == parse_diffop("z*D + 1")

    def test_rational_coefficients(self):
        from geops.parser import parse_diffop
        A = parse_diffop("D^2 - 1/4*z^2 + 1/2")
        # content cleared: 4 D^2 - z^2 + 2
        assert A.coeff(2, 0) == 4
        assert A.coeff(0, 2) == -1
        assert A.coeff(0, 0) == 2

    def test_theta_only_expression_gives_theta_op(self):
        from geops.parser import parse_operator
        from geops.opalg import ThetaOp
        from geops.kernel import Poly
        T = parse_operator("T^2 - z")
        assert isinstance(T, ThetaOp)
        assert T.rows == (Poly((0, -1)), Poly(), Poly.const(1))

    def test_theta_as_diffop(self):
        from geops.parser import parse_diffop
        assert parse_diffop("T^2") == parse_diffop("z^2*D^2 + z*D")

    def test_difference_operator(self):
        from geops.parser import parse_operator
        from geops.opalg import DifferenceOp
        X = parse_operator("Delta*x")
        assert isinstance(X, DifferenceOp)
        assert X == parse_operator("x*Delta + Delta + 1")

    def test_constant(self):
        from geops.parser import parse_diffop
        from geops.opalg import DiffOp
        assert parse_diffop("6") == DiffOp.const(1)

    def test_unary_minus(self):
        from geops.parser import parse_diffop
        assert parse_diffop("-D + z") == parse_diffop("D - z")


class TestParseErrors:

    def test_syntax_error_carries_position(self):
        from geops.parser import parse_diffop
        from geops.errors import ParseError
        with pytest.raises(ParseError) as exc:
            parse_diffop("D^^2")
        assert exc.value.position >= 0
        assert exc.value.text == "D^^2"

    def test_mixed_rings(self):
        from geops.parser import parse_operator
        from geops.errors import ParseError
        with pytest.raises(ParseError):
            parse_operator("x + z")

    def test_difference_operator_is_not_a_diffop(self):
        from geops.parser import parse_diffop
        from geops.errors import ParseError
        with pytest.raises(ParseError):
            parse_diffop("x*Delta")

    def test_parse_error_is_value_error(self):
        from geops.errors import GeopsError, ParseError
        assert issubclass(ParseError, ValueError)
        assert issubclass(ParseError, GeopsError)

    def test_zero_denominator(self):
        from geops.parser import parse_diffop
        from geops.errors import ParseError
        with pytest.raises(ParseError) as exc:
            parse_diffop("1/0*D")
        assert "zero denominator" in str(exc.value)

    def test_zero_denominator_in_recurrence(self):
        from geops.parser import parse_recurrence
        from geops.errors import ParseError
        with pytest.raises(ParseError):
            parse_recurrence("a(n+1) = 1/0*a(n)")


class TestNesting:

    def test_deep_parentheses_parse_quickly(self):
        import time
        from geops.parser import parse_diffop, parse_operator
        text = "(" * 30 + "z" + ")" * 30
        start = time.perf_counter()
        result = parse_operator(text)
        assert time.perf_counter() - start < 1.0
        assert result == parse_diffop("z")

    def test_nested_power(self):
        from geops.parser import parse_diffop
        assert parse_diffop("((z + 1)^2)^2*D") == parse_diffop("(z^4 + 4*z^3 + 6*z^2 + 4*z + 1)*D")


class TestParseRecurrence:

    def test_first_order(self):
        from geops.parser import parse_recurrence
        from geops.arith import Recurrence
        from geops.kernel import Poly
        R = parse_recurrence("(n+1)*a(n+1) - a(n) = 0")
        assert R == Recurrence((Poly.const(-1), Poly((1, 1))))
        assert R.order == 1

    def test_both_sides_and_negative_shifts(self):
        from geops.parser import parse_recurrence
        assert parse_recurrence("a(n) = a(n-1) + a(n-2)") == parse_recurrence("a(n+2) - a(n+1) - a(n) = 0")

    def test_missing_equals(self):
        from geops.parser import parse_recurrence
        from geops.errors import ParseError
        with pytest.raises(ParseError):
            parse_recurrence("a(n+1) - a(n)")

    def test_nonlinear_relation(self):
        from geops.parser import parse_recurrence
        from geops.errors import ParseError
        with pytest.raises(ParseError):
            parse_recurrence("a(n)*a(n+1) = 0")


class TestParseRationals:

    def test_list(self):
        from geops.parser import parse_rationals
        assert parse_rationals("1, 2/3 -1") == [1, Fraction(2, 3), -1]

    def test_single(self):
        from geops.parser import parse_rational
        assert parse_rational(" -5/10 ") == Fraction(-1, 2)

    def test_bad_rational(self):
        from geops.parser import parse_rational
        from geops.errors import ParseError
        with pytest.raises(ParseError):
            parse_rational("1/0")


class TestSourceExpr:

    def test_dispatch_by_kind(self):
        from geops.parser import SourceExpr, parse_source
        from geops.opalg import ThetaOp
        assert isinstance(parse_source(SourceExpr("T - z", "theta-op")), ThetaOp)
        assert parse_source(SourceExpr("1 2 3", "rational-sequence-spec")) == [1, 2, 3]

    def test_unknown_kind(self):
        from geops.parser import SourceExpr
        with pytest.raises(ValueError):
            SourceExpr("D", "matrix")

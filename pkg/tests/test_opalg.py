"""
Unit tests for geops/opalg.py (Weyl algebra, theta form, transforms,
Euclidean division, difference operators).

Run from project root:
    pytest tests/test_opalg.py -v
"""
import sys
import os
import pytest
from fractions import Fraction

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

EULER = "z*D^2 + (1 - z)*D - 1"


def op(text):
    from geops.parser import parse_diffop
    return parse_diffop(text)


# ---------------------------------------------------------------------------
# Weyl algebra
# ---------------------------------------------------------------------------
class TestWeylAlgebra:

    def test_commutation_rule(self):
        from geops.opalg import DiffOp
        z, d = DiffOp.z(), DiffOp.d()
        assert d * z == z * d + 1
        assert d * z - z * d == DiffOp.const(1)

    def test_order_and_degree(self):
        A = op(EULER)
        assert A.order == 2
        assert A.degree == 1
        assert A.leading.to_str("z") == "z"

    def test_associativity_on_samples(self):
        A, B, C = op("z^2*D + 3"), op("D^2 - z"), op("(z - 1)*D + z^3")
        assert (A * B) * C == A * (B * C)

    def test_normalized_clears_content_and_sign(self):
        from geops.opalg import DiffOp
        from geops.kernel import Poly
        A = DiffOp((Poly((Fraction(2, 3),)), Poly((0, Fraction(-4, 3)))))
        N = A.normalized()
        assert N == DiffOp((Poly((-1,)), Poly((0, 2))))

    def test_strip_z(self):
        from geops.opalg import strip_z
        assert strip_z(op("z^2*D + z")) == op("z*D + 1")
        assert strip_z(op("D + z")) == op("D + z")

    def test_rendering_round_trips_through_parser(self):
        A = op(EULER)
        assert op(str(A)) == A


# ---------------------------------------------------------------------------
# Transforms
# ---------------------------------------------------------------------------
class TestTransforms:

    def test_symmetrized_fourier_laplace_of_euler(self):
        from geops.opalg import fourier_laplace
        assert fourier_laplace(op(EULER), symmetrized=True) == op("z*(1 + z)*D + z")

    def test_plain_fourier_laplace_of_airy(self):
        from geops.opalg import fourier_laplace
        assert fourier_laplace(op("D^2 - z")) == op("D + z^2")

    def test_fourier_laplace_squares_to_symmetry(self):
        from geops.opalg import fourier_laplace, symmetry
        A = op("z^2*D^2 + (3*z - 1)*D + 2")
        assert fourier_laplace(fourier_laplace(A)) == symmetry(A)

    def test_fourier_laplace_is_multiplicative(self):
        from geops.opalg import fourier_laplace
        A, B = op("z*D + 2"), op("D^2 - z + 1")
        assert fourier_laplace(A * B) == fourier_laplace(A) * fourier_laplace(B)

    def test_adjoint(self):
        from geops.opalg import adjoint
        assert adjoint(op("z*D")) == op("z*D + 1")
        A = op(EULER)
        assert adjoint(adjoint(A)) == A.normalized()

    def test_twist_exp(self):
        from geops.opalg import twist_exp
        # D - 1 kills e^z; its twist by 1 kills e^{2z}
        assert twist_exp(op("D - 1"), 1) == op("D - 2")

    def test_translate(self):
        from geops.opalg import translate
        assert translate(op("z*D"), 1) == op("(z + 1)*D")

    def test_invert(self):
        from geops.opalg import invert
        # z -> 1/z
        assert invert(op("z*D - 1")) == op("z*D + 1")

    def test_ramify_and_descend(self):
        from geops.opalg import descend, ramify
        # e^z -> e^{z^2}
        assert ramify(op("D - 1"), 2) == op("D - 2*z")
        assert descend(op("D - 2*z"), 2) == op("D - 1")
        assert ramify(op("D - 1"), 1) == op("D - 1")

    def test_descend_rejects_non_invariant_operator(self):
        from geops.opalg import descend
        from geops.errors import DescentError, PreconditionError
        with pytest.raises(DescentError):
            descend(op("D - 1"), 2)
        with pytest.raises(PreconditionError):
            descend(op("D - 1"), 0)


# ---------------------------------------------------------------------------
# theta form
# ---------------------------------------------------------------------------
class TestThetaForm:

    def test_theta_form_of_d(self):
        from geops.opalg import ThetaOp, theta_form
        from geops.kernel import Poly
        theta, m = theta_form(op("D"))
        assert m == 1
        assert theta == ThetaOp((Poly(), Poly.const(1)))

    def test_theta_squared_to_diffop(self):
        from geops.opalg import ThetaOp
        from geops.kernel import Poly
        assert ThetaOp((Poly(), Poly(), Poly.const(1))).to_diffop() == op("z^2*D^2 + z*D")

    def test_slices(self):
        from geops.opalg import theta_form
        from geops.kernel import Poly
        slices = theta_form(op("D^2 - z"))[0].z_slices()
        assert slices == {0: Poly((0, -1, 1)), 3: Poly.const(-1)}


# ---------------------------------------------------------------------------
# Euclidean division over Q(z)
# ---------------------------------------------------------------------------
class TestDivision:

    def test_right_division_of_worked_example(self):
        from geops.opalg import DiffOp, right_divide
        from geops.kernel import Poly
        phi = op("z*D^2 + (1 - 3*z)*D + 2*z")
        lhs = DiffOp.of_poly(Poly.linear(-1)) * phi
        q, r = right_divide(lhs, op("(z - 1)*D - z"))
        assert r.is_zero()
        assert q.is_polynomial()
        assert q.as_diffop() == op("z*D - 2*z + 1")

    def test_division_with_remainder(self):
        from geops.opalg import right_divide
        q, r = right_divide(op("D^2"), op("D - 1"))
        assert q.as_diffop() == op("D + 1")
        assert r.as_diffop() == op("1")

    def test_lclm_and_gcrd(self):
        from geops.opalg import gcrd, lclm
        assert lclm(op("D"), op("D - 1")) == op("D^2 - D")
        assert gcrd(op("D"), op("D - 1")) == op("1")
        assert gcrd(op("D^2 - D"), op("D - 1")) == op("D - 1")

    def test_division_by_zero(self):
        from geops.opalg import DiffOp, right_divide
        with pytest.raises(ZeroDivisionError):
            right_divide(op("D"), DiffOp())


# ---------------------------------------------------------------------------
# Series action
# ---------------------------------------------------------------------------
class TestApply:

    def test_exponential_is_annihilated(self):
        import math
        from geops.opalg import apply
        from geops.series import PuiseuxLogSeries
        s = PuiseuxLogSeries.power_series([Fraction(1, math.factorial(n)) for n in range(12)])
        assert apply(op("D - 1"), s).is_zero()
        assert not apply(op("D - 2"), s).is_zero()

    def test_lclm_kills_sum_of_g_windows(self):
        from geops.arith import generate, operator_to_recurrence
        from geops.opalg import apply, lclm
        from geops.series import PuiseuxLogSeries
        # 1/(1 - z) and 1/(1 - z)^2, each as a window of 40 terms
        A, B = op("(1 - z)*D - 1"), op("(1 - z)*D - 2")
        f = generate(operator_to_recurrence(A), [1], 39)
        g = generate(operator_to_recurrence(B), [1], 39)
        assert [g[n] for n in range(4)] == [1, 2, 3, 4]
        total = PuiseuxLogSeries.power_series([a + b for a, b in zip(f.terms, g.terms)])
        L = lclm(A, B)
        assert L.order == 2
        assert apply(L, total).is_zero()
        assert not apply(A, total).is_zero()


# ---------------------------------------------------------------------------
# Difference operators
# ---------------------------------------------------------------------------
class TestDifferenceOp:

    def test_commutation_rule(self):
        from geops.opalg import DifferenceOp
        x, delta = DifferenceOp.x(), DifferenceOp.delta()
        assert delta * x == x * delta + delta + 1

    def test_powers(self):
        from geops.opalg import DifferenceOp
        from geops.kernel import Poly
        delta = DifferenceOp.delta()
        assert (delta ** 2).rows == (Poly(), Poly(), Poly.const(1))

    def test_describe(self):
        from geops.opalg import DifferenceOp, describe
        assert describe(DifferenceOp.x() * DifferenceOp.delta()) == "x*Delta"

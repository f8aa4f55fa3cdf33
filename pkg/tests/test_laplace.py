"""
Unit tests for geops/laplace.py (formal Laplace transform, rho tables,
identity checks, E-operator pipelines, recalibration).

Run from project root:
    pytest tests/test_laplace.py -v
"""
import sys
import os
import pytest
from fractions import Fraction

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))


def op(text):
    from geops.parser import parse_diffop
    return parse_diffop(text)


# ---------------------------------------------------------------------------
# Series
# ---------------------------------------------------------------------------
class TestLaplaceSeries:

    def test_factorials_appear(self):
        from geops.laplace import laplace_series
        h = laplace_series([1, 1, 1])
        assert h.direction == -1
        assert [h.coefficient(-n - 1) for n in range(3)] == [1, 1, 2]

    def test_borel_inverts(self):
        from geops.laplace import borel_series, laplace_series
        F = [Fraction(1, 3), 0, 5, Fraction(-2, 7)]
        assert borel_series(laplace_series(F)) == F

    def test_borel_rejects_series_at_zero(self):
        from geops.laplace import borel_series
        from geops.series import PuiseuxLogSeries
        from geops.errors import PreconditionError
        with pytest.raises(PreconditionError):
            borel_series(PuiseuxLogSeries.power_series([1, 2]))


class TestLaplaceMonomial:

    def test_integer_exponents(self):
        from geops.laplace import laplace_monomial
        assert laplace_monomial(0) == [1]
        assert laplace_monomial(2) == [2]

    def test_fractional_exponent_keeps_gamma_seed(self):
        from geops.laplace import laplace_monomial
        from geops.series import gamma_seed
        assert laplace_monomial(Fraction(1, 2)) == [gamma_seed(Fraction(3, 2))]
        # same class, shifted by one: Gamma(5/2) = 3/2 Gamma(3/2)
        assert laplace_monomial(Fraction(3, 2)) == [gamma_seed(Fraction(3, 2)) * Fraction(3, 2)]

    def test_pole_is_regularized(self):
        from geops.laplace import laplace_monomial
        from geops.series import gamma_seed
        # z^{-1} -> Gamma'(1) - log z
        assert laplace_monomial(-1) == [gamma_seed(1, 1), Fraction(-1)]

    def test_puiseux_monomial(self):
        from geops.laplace import laplace_puiseux
        from geops.series import gamma_seed
        h = laplace_puiseux(Fraction(1, 3))
        assert h.coefficient(Fraction(-4, 3)) == gamma_seed(Fraction(4, 3))

    def test_full_transform_inverts(self):
        from geops.laplace import agree, laplace_full, laplace_inverse
        from geops.series import PuiseuxLogSeries
        y = PuiseuxLogSeries.power_series([1, Fraction(1, 2), Fraction(1, 3)], base=Fraction(1, 3))
        back = laplace_inverse(laplace_full(y))
        assert back.direction == 1
        assert agree(back, y)

    def test_inverse_rejects_foreign_terms(self):
        from geops.laplace import laplace_inverse
        from geops.series import PuiseuxLogSeries
        from geops.errors import PreconditionError
        # a bare rational at z^{-4/3} is not Gamma(4/3) times a rational
        h = PuiseuxLogSeries.power_series([1], base=Fraction(-4, 3), direction=-1)
        with pytest.raises(PreconditionError):
            laplace_inverse(h)


class TestRhoTable:

    def test_base_row(self):
        from geops.laplace import rho_table
        from geops.series import Seed, SeedCombo
        table = rho_table(Fraction(1, 2), 1, 3)
        assert table.value(0, 1) == -1
        assert table.value(0, 0) == SeedCombo.of_seed(Seed("rho", Fraction(1, 2), 0))
        assert table.flagged == []
        assert set(table.rows) == {-3, -2, -1, 0, 1, 2, 3}

    def test_forward_step(self):
        from geops.laplace import rho_table
        table = rho_table(Fraction(1, 2), 1, 1)
        # rho_{1,0} = rho_{0,0} - 1/(alpha+1) rho_{0,1}
        assert table.vector(1, 0) == [1, Fraction(-2, 3)]

    def test_pole_rows_are_flagged(self):
        from geops.laplace import rho_table
        table = rho_table(-2, 0, 3)
        assert table.flagged == [2]
        assert 2 not in table.rows


# ---------------------------------------------------------------------------
# Identities
# ---------------------------------------------------------------------------
class TestIdentities:

    def test_pochhammer_sum(self):
        from geops.laplace import pochhammer_sum_identity
        assert pochhammer_sum_identity(Fraction(1, 3), 4)
        assert pochhammer_sum_identity(Fraction(-5, 2), 6)

    def test_pochhammer_sum_pole(self):
        from geops.laplace import pochhammer_sum_identity
        from geops.errors import PreconditionError
        with pytest.raises(PreconditionError):
            pochhammer_sum_identity(-2, 3)

    def test_transform_rules(self):
        from geops.laplace import laplace_identities
        result = laplace_identities([1, 2, Fraction(1, 2), 0, 7], Fraction(2, 3))
        assert result == {"derivative": True, "multiplication": True, "integral": True,
                          "shift": True, "scaling": True}

    def test_transform_rules_on_random_e_series(self):
        import math
        import random
        from geops.laplace import laplace_identities
        rng = random.Random(7)
        for _ in range(100):
            F = [Fraction(rng.randint(-5, 5), rng.randint(1, 4) * math.factorial(n)) for n in range(31)]
            a = Fraction(rng.choice([-3, -2, -1, 1, 2, 3]), rng.randint(1, 3))
            result = laplace_identities(F, a)
            assert all(result.values()), (F[:3], a, result)

    def test_pochhammer_sum_on_random_arguments(self):
        import random
        from geops.laplace import pochhammer_sum_identity
        rng = random.Random(7)
        for _ in range(50):
            q = rng.randint(2, 7)
            p = rng.choice([k for k in range(-20, 21) if k % q])
            n = rng.randint(0, 12)
            assert pochhammer_sum_identity(Fraction(p, q), n), (p, q, n)

    def test_partie_finie_integral(self):
        from geops.laplace import check_partie_finie_definition, partie_finie_integral
        # int_0^z (z - t) t^{1/2} dt = 4/15 z^{5/2}
        assert partie_finie_integral(Fraction(1, 2), 0, 1) == [Fraction(4, 15)]
        assert check_partie_finie_definition(Fraction(1, 2), 0, 1)

    def test_partie_finie_needs_large_n(self):
        from geops.laplace import check_partie_finie_definition
        from geops.errors import PreconditionError
        with pytest.raises(PreconditionError):
            check_partie_finie_definition(Fraction(-7, 2), 0, 1)

    def test_agree_detects_difference(self):
        from geops.laplace import agree
        from geops.series import PuiseuxLogSeries
        a = PuiseuxLogSeries.power_series([1, 2, 3])
        b = PuiseuxLogSeries.power_series([1, 2])
        c = PuiseuxLogSeries.power_series([1, 5])
        assert agree(a, b)
        assert not agree(a, c)


# ---------------------------------------------------------------------------
# Operator pipelines
# ---------------------------------------------------------------------------
class TestPipelines:

    def test_build_e_from_rational_function_operator(self):
        from geops.laplace import build_E_operator
        E = build_E_operator(op("(1 - z)*(2*z - 1)*D - 2*z"))
        assert E.normalized() == op("z*D^2 + (1 - 3*z)*D + 2*z")

    def test_build_e_from_laplace_side(self):
        from geops.laplace import build_E_operator
        E = build_E_operator(op("z*((1 + z)*D + 1)"), from_laplace_side=True)
        assert E.normalized() == op("z*D^2 + (1 - z)*D - 1")

    def test_recalibrate_airy(self):
        from geops.laplace import recalibrate
        assert recalibrate(op("D^2 - z"), Fraction(-2, 3)) == op("9*z*D^2 + 3*D - 4*z")

    def test_recalibrate_weber(self):
        from geops.laplace import recalibrate
        E = recalibrate(op("D^2 - 1/4*z^2 + 1/2 + 1/7"), Fraction(-1, 2))
        assert E == op("16*z*D^2 + 8*D + 18/7 - z")

    def test_recalibrate_zero_order(self):
        from geops.laplace import recalibrate
        from geops.errors import PreconditionError
        with pytest.raises(PreconditionError):
            recalibrate(op("D^2 - z"), 0)

    def test_build_e_of_zero_operator(self):
        from geops.laplace import build_E_operator
        from geops.opalg import DiffOp
        from geops.errors import PreconditionError
        with pytest.raises(PreconditionError):
            build_E_operator(DiffOp())

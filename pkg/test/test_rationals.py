"""
Unit Tests for the rational core
Exact parsing, sign vectors, ell and its regimes, projection coefficients.
"""

import unittest
from fractions import Fraction

from exceptions import InvalidInputException, PreconditionException
from rationals import (
    Angle, Regime, SignVector, beta_gamma, binomial, cross_projection, ell, ell_regime,
    extremal_projection_coefficients, floor_rational, format_rational, negative_clique_apply,
    parse_rational, projection_coefficients
)

ALPHAS = [Fraction(1, d) for d in range(5, 28, 2)]


class TestParsing(unittest.TestCase):
    """parse_rational, format_rational, floor_rational."""

    def test_parse_fraction_and_integer(self):
        self.assertEqual(parse_rational("-5/13"), Fraction(-5, 13))
        self.assertEqual(parse_rational(" 3 "), Fraction(3))
        self.assertEqual(parse_rational("2/4"), Fraction(1, 2))

    def test_parse_rejects_decimals_and_garbage(self):
        for text in ("0.2", "1e-3", "abc", "1/0", ""):
            with self.subTest(text=text):
                with self.assertRaises(InvalidInputException):
                    parse_rational(text)

    def test_format_always_has_denominator(self):
        self.assertEqual(format_rational(Fraction(3)), "3/1")
        self.assertEqual(format_rational(Fraction(-5, 13)), "-5/13")

    def test_floor_is_exact(self):
        self.assertEqual(floor_rational(Fraction(2112, 5)), 422)
        self.assertEqual(floor_rational(Fraction(-1, 3)), -1)
        self.assertEqual(floor_rational(Fraction(6)), 6)


class TestAngle(unittest.TestCase):

    def test_parse_forms(self):
        self.assertEqual(Angle.parse("1/7"), Angle(7))
        self.assertEqual(Angle.parse("9"), Angle(9))
        self.assertEqual(str(Angle(13)), "1/13")
        self.assertEqual(Angle(5).as_rational(), Fraction(1, 5))
        self.assertEqual(Angle(7).extremal_base_size, 8)

    def test_rejects_even_small_and_non_unit(self):
        for text in ("1/4", "1/1", "2/7", "x"):
            with self.subTest(text=text):
                with self.assertRaises(InvalidInputException):
                    Angle.parse(text)

    def test_angles_sort_by_denominator(self):
        self.assertEqual(sorted([Angle(9), Angle(3), Angle(5)]), [Angle(3), Angle(5), Angle(9)])


class TestSignVector(unittest.TestCase):

    def test_counts_and_canonical_form(self):
        eps = SignVector((1, -1, -1, -1, 1))

        self.assertEqual(eps.positive_count(), 2)
        self.assertEqual(eps.folded_count(), 2)
        self.assertEqual(eps.negated().entries, (-1, 1, 1, 1, -1))
        self.assertEqual(eps.canonical(), eps.negated().canonical())
        self.assertEqual(eps.canonical().entries, (-1, 1, 1, 1, -1))
        self.assertEqual(str(eps), "(+,-,-,-,+)")

    def test_balanced_and_constant(self):
        self.assertTrue(SignVector((1, -1, 1, -1)).is_balanced())
        self.assertFalse(SignVector((1, -1, 1)).is_balanced())
        self.assertTrue(SignVector((-1, -1, -1)).is_constant())

    def test_rejects_zero_entries(self):
        with self.assertRaises(InvalidInputException):
            SignVector((1, 0, -1))


class TestEll(unittest.TestCase):
    """ell(K, n) values, regimes and structural properties."""

    def test_known_values(self):
        self.assertEqual(ell(Fraction(1, 7), 6, 1), Fraction(1, 4))
        self.assertEqual(ell(Fraction(1, 7), 6, 2), Fraction(1, 7))
        self.assertEqual(ell(Fraction(1, 7), 4, 2), Fraction(1, 14))
        self.assertEqual(ell(Fraction(1, 5), 4, 1), Fraction(1, 5))
        self.assertEqual(ell(Fraction(1, 5), 4, 2), Fraction(2, 15))
        self.assertEqual(ell(Fraction(1, 5), 5, 1), Fraction(7, 15))

    def test_property_suite(self):
        """Range, regime consistency, symmetry and strict decrease over every admissible triple."""
        for alpha in ALPHAS:
            limit = alpha.denominator + 1
            for K in range(2, limit):
                previous = None
                for n in range(1, K // 2 + 1):
                    with self.subTest(alpha=alpha, K=K, n=n):
                        value = ell(alpha, K, n)
                        self.assertTrue(0 < value < 1)
                        self.assertEqual(value, ell(alpha, K, K - n))
                        regime = ell_regime(alpha, K, n)
                        if value < alpha:
                            self.assertIs(regime, Regime.BELOW_ALPHA)
                        elif value == alpha:
                            self.assertIs(regime, Regime.EQUAL_ALPHA)
                        else:
                            self.assertIs(regime, Regime.ABOVE_ALPHA)
                        if previous is not None:
                            self.assertLess(value, previous)
                        previous = value

    def test_regime_examples(self):
        seventh = Fraction(1, 7)
        self.assertIs(ell_regime(seventh, 6, 1), Regime.ABOVE_ALPHA)
        self.assertIs(ell_regime(seventh, 6, 2), Regime.EQUAL_ALPHA)
        self.assertIs(ell_regime(seventh, 6, 3), Regime.BELOW_ALPHA)
        self.assertIs(ell_regime(seventh, 6, 5), Regime.ABOVE_ALPHA)

    def test_preconditions(self):
        with self.assertRaises(PreconditionException):
            ell(Fraction(1, 7), 8, 4)
        with self.assertRaises(PreconditionException):
            ell(Fraction(1, 7), 4, 0)
        with self.assertRaises(PreconditionException):
            ell(Fraction(1, 7), 1, 1)
        with self.assertRaises(PreconditionException):
            ell(Fraction(3, 2), 2, 1)


class TestBetaGamma(unittest.TestCase):

    def test_fifth_residual_pair(self):
        self.assertEqual(beta_gamma(Fraction(1, 5), Fraction(2, 15)), (Fraction(1, 13), Fraction(-5, 13)))

    def test_seventh_pairs(self):
        self.assertEqual(beta_gamma(Fraction(1, 7), Fraction(1, 14)), (Fraction(1, 13), Fraction(-3, 13)))

    def test_rejects_degenerate_ell(self):
        with self.assertRaises(PreconditionException):
            beta_gamma(Fraction(1, 5), Fraction(1))


class TestProjections(unittest.TestCase):

    def test_coefficients_solve_the_clique_system(self):
        for alpha in (Fraction(1, 5), Fraction(1, 7), Fraction(1, 13)):
            for eps in ((1, -1), (1, 1, -1), (-1, 1, 1, 1), (1, -1, 1, -1, 1)):
                if len(eps) >= alpha.denominator + 1:
                    continue
                with self.subTest(alpha=alpha, eps=eps):
                    coefficients = projection_coefficients(alpha, eps)
                    self.assertEqual(negative_clique_apply(alpha, coefficients),
                                     tuple(alpha * e for e in eps))

    def test_coefficient_examples_at_fifth(self):
        fifth = Fraction(1, 5)
        third, sixth = Fraction(1, 3), Fraction(1, 6)

        self.assertEqual(projection_coefficients(fifth, (-1, 1, 1, 1)), (Fraction(0), third, third, third))
        self.assertEqual(projection_coefficients(fifth, SignVector((1, 1, -1, -1))), (sixth, sixth, -sixth, -sixth))

    def test_norm_of_projection_is_ell(self):
        alpha = Fraction(1, 7)
        eps = SignVector((1, -1, -1, 1, 1))
        self.assertEqual(cross_projection(alpha, eps, eps), ell(alpha, 5, 3))

    def test_cross_projections_at_fifth(self):
        fifth = Fraction(1, 5)
        single = SignVector((-1, 1, 1, 1))
        self.assertEqual(cross_projection(fifth, single, SignVector((1, -1, 1, 1))), Fraction(1, 15))
        self.assertEqual(cross_projection(fifth, single, SignVector((1, 1, -1, -1))), Fraction(-1, 15))

    def test_extremal_coefficients(self):
        self.assertEqual(extremal_projection_coefficients((1, -1, -1, 1)),
                         (Fraction(1, 4), Fraction(-1, 4), Fraction(-1, 4), Fraction(1, 4)))
        with self.assertRaises(PreconditionException):
            extremal_projection_coefficients((1, 1, -1, 1))

    def test_binomial(self):
        self.assertEqual(binomial(8, 4), 70)
        self.assertEqual(binomial(3, 5), 0)
        with self.assertRaises(PreconditionException):
            binomial(-1, 2)


if __name__ == '__main__':
    unittest.main(verbosity=2)

import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geomk.numerics import (Mode, ModeError, ParseError, compensated_sum,
                            falling_factorial, gen_binomial, parse_scalar)

EPS = 2.0 ** -52


class TestGenBinomial:
    @pytest.mark.parametrize("i,j,expected", [
        (-1, -1, 1),    # C(i,i) = 1 even for negative i
        (-1, 0, 0),     # j > i forces 0 even at j = 0
        (5, 2, 10),
        (3, 7, 0),
        (-3, -3, 1),
        (-3, -4, 0),    # j < 0 and j != i
        (-3, -2, 0),
        (0, 0, 1),
        (7, 0, 1),
    ])
    def test_examples(self, i, j, expected):
        assert gen_binomial(i, j) == expected

    def test_column_zero(self):
        for i in range(0, 20):
            assert gen_binomial(i, 0) == 1
        for i in range(-20, 0):
            assert gen_binomial(i, 0) == 0

    @given(st.integers(min_value=1, max_value=60),
           st.integers(min_value=0, max_value=60))
    def test_pascal_rule(self, i, j):
        if j <= i:
            assert gen_binomial(i, j) == gen_binomial(i - 1, j - 1) + gen_binomial(i - 1, j)

    def test_matches_math_comb_on_ordinary_range(self):
        for i in range(0, 25):
            for j in range(0, i + 1):
                assert gen_binomial(i, j) == math.comb(i, j)


class TestCompensatedSum:
    def test_residual_preserved(self):
        assert compensated_sum([1.0, -1.0, 1e-16]) == 1e-16

    def test_empty(self):
        assert compensated_sum([]) == 0

    def test_exact_rationals(self):
        assert compensated_sum([Fraction(1, 3), Fraction(1, 6)]) == Fraction(1, 2)

    def test_mixed_modes_rejected(self):
        with pytest.raises(ModeError):
            compensated_sum([0.5, Fraction(1, 2)])

    def test_ints_are_neutral(self):
        assert compensated_sum([1, 2, 3]) == 6
        assert compensated_sum([1.5, 2]) == 3.5

    @settings(max_examples=60)
    @given(st.lists(st.floats(min_value=-1e8, max_value=1e8,
                              allow_nan=False, allow_infinity=False),
                    min_size=1, max_size=50),
           st.integers(min_value=0, max_value=2 ** 32))
    def test_shuffle_stability(self, values, seed):
        base = compensated_sum(values)
        shuffled = list(values)
        random.Random(seed).shuffle(shuffled)
        other = compensated_sum(shuffled)
        budget = 4 * EPS * sum(abs(v) for v in values)
        assert abs(base - other) <= budget

    def test_alternating_cancellation(self):
        # large alternating pairs leave exactly the small residual
        terms = [1e15, -1e15, 3.0, 1e12, -1e12]
        assert compensated_sum(terms) == 3.0

    @given(st.lists(st.fractions(max_denominator=10 ** 6), max_size=30),
           st.integers(min_value=0, max_value=2 ** 32))
    def test_exact_sum_is_order_independent(self, values, seed):
        shuffled = list(values)
        random.Random(seed).shuffle(shuffled)
        assert compensated_sum(values) == compensated_sum(shuffled)


class TestParseScalar:
    def test_fraction_literal_always_exact(self):
        assert parse_scalar("1/2", Mode.FLOAT) == Fraction(1, 2)
        assert parse_scalar("1/2", Mode.EXACT) == Fraction(1, 2)

    def test_decimal_exact_mode_is_base10(self):
        assert parse_scalar("0.25", Mode.EXACT) == Fraction(1, 4)
        # no float round-trip: 0.3 must mean 3/10
        assert parse_scalar("0.3", Mode.EXACT) == Fraction(3, 10)
        assert parse_scalar("0.3", Mode.EXACT) != Fraction(0.3)

    def test_decimal_float_mode(self):
        value = parse_scalar("0.25", Mode.FLOAT)
        assert isinstance(value, float) and value == 0.25

    def test_zero_denominator(self):
        with pytest.raises(ParseError, match="3/0"):
            parse_scalar("3/0")

    @pytest.mark.parametrize("text", ["abc", "1/2/3", "0..5", "", "1/x"])
    def test_malformed(self, text):
        with pytest.raises(ParseError):
            parse_scalar(text)

    @given(st.integers(min_value=-10 ** 9, max_value=10 ** 9),
           st.integers(min_value=1, max_value=10 ** 9))
    def test_fraction_roundtrip(self, num, den):
        assert parse_scalar(f"{num}/{den}") == Fraction(num, den)


class TestFallingFactorial:
    def test_values(self):
        assert falling_factorial(5, 2) == 20
        assert falling_factorial(5, 0) == 1
        assert falling_factorial(3, 7) == 0
        assert falling_factorial(10, 10) == math.factorial(10)

from __future__ import annotations

import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from mpmath import iv, mpf

from valcalc.errors import DomainError, NumericalError
from valcalc.numerics import (
    Ball,
    Bounds,
    add_down,
    check_float,
    div_down,
    div_up,
    format_bounds,
    format_bounds_compact,
    mul_down,
    mul_up,
    op_error_bound,
    parse_bounds_text,
    rational_down,
    rational_nearest,
    rational_up,
    rounded_op,
    sqrt_down,
    sqrt_up,
    sum_up,
    to_rational,
    ulp,
)

iv.prec = 200


def iv_function(name: str):
    if name == "atan":
        return lambda x: iv.atan2(x, iv.mpf(1))
    return getattr(iv, name)


def iv_encloses(b: Bounds, value) -> bool:
    """Rigorous check that the mpmath interval ``value`` lies inside ``b``."""
    lo = iv.mpf(Fraction(b.lower).numerator) / Fraction(b.lower).denominator
    hi = iv.mpf(Fraction(b.upper).numerator) / Fraction(b.upper).denominator
    return (lo <= value) is True and (value <= hi) is True


class TestRoundedOps:
    def test_exact_sum(self):
        assert rounded_op("add", "down", 1.0, 2.0) == 3.0
        assert rounded_op("add", "up", 1.0, 2.0) == 3.0

    def test_one_third_is_bracketed_by_adjacent_floats(self):
        down = rounded_op("div", "down", 1.0, 3.0)
        up = rounded_op("div", "up", 1.0, 3.0)
        assert Fraction(down) < Fraction(1, 3) < Fraction(up)
        assert math.nextafter(down, math.inf) == up

    def test_nearest_product(self):
        exact = Fraction(0.1) * Fraction(0.1)
        got = rounded_op("mul", "nearest", 0.1, 0.1)
        for neighbour in (math.nextafter(got, -math.inf), math.nextafter(got, math.inf)):
            assert abs(Fraction(got) - exact) <= abs(Fraction(neighbour) - exact)

    def test_nan_is_rejected(self):
        with pytest.raises(NumericalError):
            rounded_op("add", "up", math.nan, 1.0)
        with pytest.raises(NumericalError):
            check_float(math.nan)

    def test_division_by_zero(self):
        with pytest.raises(DomainError):
            rounded_op("div", "up", 1.0, 0.0)

    def test_unknown_operation(self):
        with pytest.raises(ValueError):
            rounded_op("pow", "up", 1.0, 2.0)

    def test_infinity_propagates(self):
        assert rounded_op("add", "up", math.inf, 1.0) == math.inf

    def test_overflow_is_directed(self):
        big = 1.7976931348623157e308
        assert add_down(big, big) == big
        assert rounded_op("add", "up", big, big) == math.inf

    def test_subnormal_products(self):
        tiny = 5e-324
        assert mul_down(tiny, 0.5) == 0.0
        assert mul_up(tiny, 0.5) == tiny
        assert mul_down(-tiny, 0.5) == -tiny

    @settings(max_examples=300, deadline=None)
    @given(st.floats(allow_nan=False, allow_infinity=False), st.floats(allow_nan=False, allow_infinity=False))
    def test_division_sandwich(self, x, y):
        if y == 0:
            return
        exact = Fraction(x) / Fraction(y)
        lo, hi = div_down(x, y), div_up(x, y)
        assert lo == -math.inf or Fraction(lo) <= exact
        assert hi == math.inf or exact <= Fraction(hi)

    def test_sqrt_brackets(self):
        lo, hi = sqrt_down(2.0), sqrt_up(2.0)
        assert Fraction(lo) ** 2 < 2 < Fraction(hi) ** 2
        assert math.nextafter(lo, math.inf) == hi
        assert sqrt_down(4.0) == sqrt_up(4.0) == 2.0


class TestErrorBounds:
    def test_exact_sum_has_zero_error(self):
        assert op_error_bound(1.0, "add", 2.0) == 0.0

    def test_inexact_sum(self):
        e = op_error_bound(0.1, "add", 0.2)
        exact = Fraction(0.1) + Fraction(0.2)
        assert Fraction(e) >= abs(exact - Fraction(0.1 + 0.2))
        assert e <= ulp(0.3)

    @pytest.mark.parametrize("z, expected", [(1.0, 2.0**-52), (2.0, 2.0**-51), (0.75, 2.0**-53)])
    def test_ulp(self, z, expected):
        assert ulp(z) == expected

    def test_ulp_of_zero_is_an_error(self):
        with pytest.raises(DomainError):
            ulp(0.0)

    def test_sum_up_dominates_exact_sum(self):
        values = [0.1] * 10 + [1e-17, -0.3]
        assert Fraction(sum_up(values)) >= sum(Fraction(v) for v in values)


class TestRationals:
    def test_to_rational_is_exact(self):
        assert to_rational(0.5) == Fraction(1, 2)
        assert to_rational(0.1) == Fraction(3602879701896397, 36028797018963968)
        with pytest.raises(DomainError):
            to_rational(math.inf)

    @pytest.mark.parametrize("q", [Fraction(1, 3), Fraction(-2, 7), Fraction(10**400, 3), Fraction(1, 10**400)])
    def test_directed_conversion(self, q):
        lo, hi = rational_down(q), rational_up(q)
        assert lo == -math.inf or Fraction(lo) <= q
        assert hi == math.inf or q <= Fraction(hi)

    def test_nearest_conversion(self):
        assert rational_nearest(Fraction(1, 10)) == 0.1


class TestBoundsArithmetic:
    def test_subtraction(self):
        assert Bounds(1, 2) - Bounds(0, 1) == Bounds(0, 2)

    def test_dependency_example(self):
        x = Bounds(0, 1)
        assert x * (1 - x) == Bounds(0, 1)

    def test_division_endpoints(self):
        q = Bounds(1, 2) / Bounds(3, 4)
        assert q.lower == div_down(1.0, 4.0)
        assert q.upper == div_up(2.0, 3.0)
        assert Fraction(q.lower) <= Fraction(1, 4) and Fraction(2, 3) <= Fraction(q.upper)

    def test_division_by_zero_interval(self):
        with pytest.raises(DomainError):
            Bounds(1) / Bounds(-1, 1)

    def test_empty_interval_rejected(self):
        with pytest.raises(ValueError):
            Bounds(2, 1)

    def test_fraction_endpoints_round_outward(self):
        b = Bounds(Fraction(1, 3))
        assert b.lower < b.upper
        assert b.contains(Fraction(1, 3))

    def test_even_power_is_nonnegative(self):
        assert Bounds(-1, 2).pow(2) == Bounds(0, 4)
        assert Bounds(-2, 1).sqr() == Bounds(0, 4)

    def test_set_operations(self):
        a, b = Bounds(0, 2), Bounds(1, 3)
        assert a.intersection(b) == Bounds(1, 2)
        assert Bounds(0, 1).intersection(Bounds(2, 3)) is None
        assert a.hull(b) == Bounds(0, 3)
        assert Bounds(1, 2).refines(Bounds(1, 2))
        assert not Bounds(1, 2).inside(Bounds(1, 2))
        assert Bounds(1.5).inside(Bounds(1, 2))
        lo, hi = Bounds(0, 2).split()
        assert lo == Bounds(0, 1) and hi == Bounds(1, 2)

    def test_midpoint_radius(self):
        b = Bounds(1, 3)
        assert b.mid() == 2.0 and b.rad() == 1.0 and b.width() == 2.0
        assert Bounds(-3, 1).mag() == 3.0 and Bounds(-3, 1).mig() == 0.0

    def test_max_min_abs(self):
        assert Bounds(-1, 2).abs() == Bounds(0, 2)
        assert Bounds(0, 1).max(Bounds(0.5, 3)) == Bounds(0.5, 3)
        assert Bounds(0, 1).min(Bounds(0.5, 3)) == Bounds(0, 1)

    def test_fma_and_hlf(self):
        assert Bounds(2).fma(3, 1) == Bounds(7)
        assert Bounds(1, 3).hlf() == Bounds(0.5, 1.5)

    @settings(max_examples=200, deadline=None)
    @given(st.fractions(min_value=-100, max_value=100, max_denominator=1000),
           st.fractions(min_value=-100, max_value=100, max_denominator=1000),
           st.sampled_from(["add", "sub", "mul", "div"]))
    def test_inclusion_on_rational_points(self, p, q, op):
        a, b = Bounds(p), Bounds(q)
        if op == "div" and q == 0:
            return
        result = {"add": a + b, "sub": a - b, "mul": a * b, "div": a / b if q else None}[op]
        exact = {"add": p + q, "sub": p - q, "mul": p * q, "div": p / q if q else None}[op]
        assert result.contains(exact)


class TestElementary:
    def test_exp_zero(self):
        e = Bounds(0).exp()
        assert e.contains(1) and e.width() <= 2.0**-50

    def test_sqrt_four(self):
        assert Bounds(4).sqrt().contains(2)

    def test_exp_one(self):
        assert iv_encloses(Bounds(1).exp(), iv.exp(1))
        assert Bounds(1).exp().contains(2.718281828459045)

    @pytest.mark.parametrize("name", ["exp", "log", "sin", "cos", "tan", "atan", "sqrt"])
    @pytest.mark.parametrize("x", [Fraction(1, 3), Fraction(7, 5), Fraction(3), Fraction(-5, 2), Fraction(100)])
    def test_point_enclosures(self, name, x):
        if name in ("log", "sqrt") and x <= 0:
            return
        b = getattr(Bounds(x), name)()
        X = iv.mpf(x.numerator) / x.denominator
        assert iv_encloses(b, iv_function(name)(X))
        assert b.width() <= 1e-13 * max(1.0, b.mag())

    @pytest.mark.parametrize("name", ["exp", "log", "sin", "cos", "atan"])
    def test_interval_enclosures(self, name):
        b = Bounds(0.5, 2.5)
        r = getattr(b, name)()
        for k in range(21):
            x = mpf(0.5) + mpf(k) / 10
            assert iv_encloses(r, iv_function(name)(iv.mpf(x)))

    def test_sine_extrema_inside_interval(self):
        r = Bounds(1, 2).sin()
        assert r.upper == 1.0
        assert Bounds(3, 4).cos().lower == -1.0

    def test_log_of_nonpositive(self):
        with pytest.raises(DomainError):
            Bounds(-1, 1).log()

    def test_sqrt_of_negative(self):
        with pytest.raises(DomainError):
            Bounds(-1, 1).sqrt()

    def test_rec(self):
        r = Bounds(2, 4).rec()
        assert r == Bounds(0.25, 0.5)


class TestBall:
    def test_round_trip(self):
        b = Ball(1.0, 0.5)
        assert b.to_bounds() == Bounds(0.5, 1.5)
        back = Ball.from_bounds(Bounds(0.5, 1.5))
        assert back.contains(Fraction(1, 2)) and back.contains(Fraction(3, 2))

    def test_negative_radius(self):
        with pytest.raises(ValueError):
            Ball(0.0, -1.0)


class TestFormatting:
    def test_common_prefix(self):
        b = Bounds(1.2247448713914, 1.2247448713917)
        text = format_bounds_compact(b)
        assert text.startswith("1.22474487139")
        assert parse_bounds_text(text).refines(Bounds(1.224744871391, 1.224744871392))
        assert b.refines(parse_bounds_text(text))

    def test_point(self):
        assert format_bounds_compact(Bounds(0.5)) == "0.500000000000000"

    def test_wide_interval_uses_endpoints(self):
        assert format_bounds_compact(Bounds(1, 2)) == "[1.0:2.0]"

    def test_tiny_interval_around_zero(self):
        b = Bounds(-1e-17, 2e-17)
        assert b.refines(parse_bounds_text(format_bounds_compact(b)))

    @pytest.mark.parametrize("b", [Bounds(0.1, 0.3), Bounds(-2.5, -2.25), Bounds(1e10, 1e10 + 1)])
    def test_parse_encloses(self, b):
        assert b.refines(parse_bounds_text(format_bounds(b)))
        assert b.refines(parse_bounds_text(format_bounds_compact(b)))

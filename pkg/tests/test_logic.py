from __future__ import annotations

import pytest

from valcalc.logic import (
    ApproximateKleenean,
    ValidatedKleenean,
    approximate_less,
    bounds_less,
    bounds_less_equal,
    decide,
    definitely,
    kleene_and,
    kleene_not,
    kleene_or,
    possibly,
    probably,
)
from valcalc.numerics import Bounds

T, F, I = ValidatedKleenean.TRUE, ValidatedKleenean.FALSE, ValidatedKleenean.INDETERMINATE


class TestConnectives:
    def test_and(self):
        assert kleene_and(T, I) is I
        assert kleene_and(F, I) is F
        assert kleene_and(T, T) is T

    def test_or(self):
        assert kleene_or(T, I) is T
        assert kleene_or(F, I) is I
        assert kleene_or(F, F) is F

    def test_not(self):
        assert kleene_not(I) is I
        assert kleene_not(T) is F
        assert ~F is T

    @pytest.mark.parametrize("a", [T, F, I])
    @pytest.mark.parametrize("b", [T, F, I])
    def test_de_morgan(self, a, b):
        assert ~(a & b) is (~a | ~b)

    def test_booleans_mix(self):
        assert kleene_and(True, I) is I
        with pytest.raises(TypeError):
            kleene_and(1, I)


class TestComparisons:
    def test_disjoint_ordered(self):
        assert bounds_less(Bounds(1, 2), Bounds(3, 4)) is T

    def test_overlap(self):
        assert bounds_less(Bounds(1, 3), Bounds(2, 4)) is I

    def test_touching_reversed(self):
        assert bounds_less(Bounds(2, 3), Bounds(1, 2)) is F

    def test_less_equal(self):
        assert bounds_less_equal(Bounds(1, 2), Bounds(2, 3)) is T
        assert bounds_less_equal(Bounds(3, 4), Bounds(1, 2)) is F

    def test_operators_on_bounds(self):
        assert (Bounds(1, 2) < Bounds(3, 4)) is T
        assert (Bounds(1, 3) > Bounds(2, 4)) is I

    def test_approximate(self):
        assert approximate_less(1.0, 2.0) is ApproximateKleenean.LIKELY
        assert probably(approximate_less(1.0, 2.0))
        assert not probably(approximate_less(2.0, 1.0))


class TestDecisions:
    def test_definitely(self):
        assert not definitely(I)
        assert definitely(T)

    def test_possibly(self):
        assert possibly(I)
        assert not possibly(F)

    def test_decide(self):
        assert decide(T) is True
        assert decide(I) is False

    def test_truth_value_is_not_implicit(self):
        with pytest.raises(TypeError):
            bool(I)

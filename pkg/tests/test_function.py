from __future__ import annotations

import json
from fractions import Fraction

import pytest

from valcalc.errors import DomainError, ShapeError
from valcalc.function import BoxDomain, ExpressionFunction, FunctionPatch, VectorFunctionPatch, patch_from_function
from valcalc.numerics import Bounds
from valcalc.parser import parse_function
from valcalc.taylor_model import NULL_SWEEPER, threshold_sweeper

FN = ["v - v^3/3 - w + 0.35", "(v + 0.7 - 2*w)/12.5"]


@pytest.fixture
def fn():
    return parse_function(FN, ["v", "w"])


class TestExpressionFunction:
    def test_exact_evaluation(self):
        f = parse_function(["x*y + 1/3"], ["x", "y"])
        assert f([Fraction(2), Fraction(1, 2)]) == [Fraction(4, 3)]

    def test_interval_evaluation(self):
        f = parse_function(["x*(1-x)"], ["x"])
        assert f.evaluate_bounds([Bounds(0, 1)])[0] == Bounds(0, 1)

    def test_fn_at_equilibrium(self, fn):
        # v = 0, w = 0.35 is an exact equilibrium
        assert fn([Fraction(0), Fraction(7, 20)]) == [0, 0]

    def test_fn_vanishes_on_certified_roots(self, fn):
        from valcalc.solvers import SolverConfig, solve_all
        boxes = solve_all(fn, BoxDomain([(-2, 3), (-1, 2)]), SolverConfig(tolerance=1e-12, max_steps=32))
        assert len(boxes) == 3
        for sol in boxes:
            vals = fn.evaluate_bounds(sol.box)
            assert all(r.contains(0) and r.width() < 1e-9 for r in vals)

    def test_differential(self):
        f = parse_function(["v - v^3/3 - w"], ["v", "w"])
        d = f.differential([Fraction(1), Fraction(0)], 2)[0]
        assert d.value == Fraction(2, 3)
        assert d.gradient() == [0, -1]
        assert d.extract_derivative((2, 0)) == -2

    def test_derivative(self):
        f = parse_function(["x - x^3/3"], ["x"])
        assert f.derivative(0)([Fraction(2)]) == [-3]

    def test_jacobian_interval(self, fn):
        J = fn.jacobian([Bounds(0, 1), Bounds(0)])
        assert J[0][0].contains(1) and J[0][0].contains(0)
        assert J[1][1].contains(Fraction(-4, 25))

    def test_compose_with_identity(self, fn):
        g = fn.compose(ExpressionFunction.identity(2))
        p = [Fraction(1, 3), Fraction(-2, 7)]
        assert g(p) == fn(p)

    def test_join_and_combine(self):
        f = parse_function(["x + 1"], ["x"])
        g = parse_function(["x * 2"], ["x"])
        assert f.join(g)([Fraction(3)]) == [4, 6]
        assert f.combine(g)([Fraction(3), Fraction(5)]) == [4, 10]

    def test_lie_derivative(self):
        field = parse_function(["y", "-x"], ["x", "y"])
        energy = parse_function(["x^2 + y^2"], ["x", "y"])
        assert energy.lie_derivative(field)([Fraction(3), Fraction(4)]) == [0]

    def test_bad_coordinate(self):
        with pytest.raises(ShapeError):
            ExpressionFunction(1, [ExpressionFunction.coordinates(2)[1]])

    def test_argument_count(self, fn):
        with pytest.raises(ShapeError):
            fn([1])


class TestBoxDomain:
    def test_outward_rounding(self):
        d = BoxDomain([(Fraction(1, 3), Fraction(2, 3))])
        assert d[0].contains(Fraction(1, 3)) and d[0].contains(Fraction(2, 3))

    def test_empty(self):
        with pytest.raises(DomainError):
            BoxDomain([(1, 0)])

    def test_split_and_membership(self):
        lo, hi = BoxDomain([(0, 2), (0, 1)]).split(0)
        assert lo.intervals == ((0.0, 1.0), (0.0, 1.0)) and hi.intervals[0] == (1.0, 2.0)
        assert lo.contains_point([0.5, 0.5]) and not lo.contains_point([1.5, 0.5])


class TestPatches:
    def test_dependency(self):
        p = patch_from_function(parse_function(["x*(1-x)"], ["x"]), BoxDomain([(0, 1)]))
        r = p[0].range()
        assert -0.3 <= r.lower and r.upper <= 0.6

    def test_constant(self):
        p = FunctionPatch.constant(BoxDomain([(0, 1)]), 2)
        assert p.range() == Bounds(2)

    def test_fn_patch_contains_pointwise(self, fn):
        dom = BoxDomain([(-1, 1), (0, Fraction(1, 2))])
        patch = patch_from_function(fn, dom, threshold_sweeper(1e-12))
        for i in range(10):
            for j in range(10):
                x = [Fraction(-1) + Fraction(2 * i, 9), Fraction(j, 18)]
                exact = fn(x)
                for comp, e in zip(patch, exact):
                    assert comp.evaluate(x).contains(e)

    def test_identity(self):
        ident = FunctionPatch.identity(BoxDomain([(1, 2)]), NULL_SWEEPER)
        assert ident[0].evaluate([1.5]) == Bounds(1.5)

    def test_evaluate_outside_domain(self):
        ident = FunctionPatch.identity(BoxDomain([(1, 2)]), NULL_SWEEPER)
        with pytest.raises(DomainError):
            ident[0].evaluate([3])

    def test_antiderivative_round_trip(self):
        dom = BoxDomain([(1, 3)])
        p = patch_from_function(parse_function(["x^2"], ["x"]), dom, NULL_SWEEPER)[0]
        back = p.antidifferentiate(0).derivative_of_midpoint(0)
        for t in (1, 1.5, 2, 2.5, 3):
            assert back.evaluate([t]).contains(t * t)

    def test_split(self):
        p = patch_from_function(parse_function(["x^3 - x"], ["x"]), BoxDomain([(-1, 1)]), NULL_SWEEPER)[0]
        lo, hi = p.split(0)
        for t in (-1, -0.5, -0.25, 0):
            assert lo.evaluate([t]).contains(t**3 - t)
        for t in (0, 0.25, 0.75, 1):
            assert hi.evaluate([t]).contains(t**3 - t)

    def test_compose(self):
        dom = BoxDomain([(0, 1)])
        outer = patch_from_function(parse_function(["y^2"], ["y"]), BoxDomain([(-1, 2)]), NULL_SWEEPER)[0]
        inner = patch_from_function(parse_function(["2*x - 1"], ["x"]), dom, NULL_SWEEPER)[0]
        c = outer.compose([inner])
        for t in (0, 0.25, 0.5, 1):
            assert c.evaluate([t]).contains((2 * t - 1) ** 2)

    def test_compose_range_escape(self):
        outer = FunctionPatch.identity(BoxDomain([(0, 1)]))[0]
        inner = patch_from_function(parse_function(["3*x"], ["x"]), BoxDomain([(0, 1)]))[0]
        with pytest.raises(DomainError):
            outer.compose([inner])

    def test_json_round_trip(self, fn):
        patch = patch_from_function(fn, BoxDomain([(-1, 1), (0, 1)]))
        back = VectorFunctionPatch.from_json(json.loads(json.dumps(patch.to_json())))
        for a, b in zip(patch, back):
            assert a.model.coefficients == b.model.coefficients and a.error == b.error
        assert back.domain.intervals == patch.domain.intervals

    def test_text_mentions_names(self):
        patch = patch_from_function(parse_function(["x^2"], ["x"]), BoxDomain([(-1, 1)]), NULL_SWEEPER)
        assert "x^2" in patch.text(["x"])

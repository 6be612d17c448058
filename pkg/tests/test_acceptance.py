"""Acceptance criteria, one test class per criterion.

Every class is tagged with ``criterion(n)``; the conftest hook prints one
PASS/FAIL line per criterion at the end of the run.
"""

from __future__ import annotations

import math
import random
import time
from fractions import Fraction

import pytest
import sympy
from mpmath import iv
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from valcalc import (
    Bounds,
    BoxDomain,
    IntegratorConfig,
    SolverConfig,
    UnknownSolutionError,
    flow_step,
    implicit,
    parse_expression,
    parse_function,
    patch_from_function,
    solve,
    solve_all,
)
from valcalc.differential import extract_derivative
from valcalc.function import ExpressionFunction
from valcalc.multiindex import indices_up_to
from valcalc.numerics import op_error_bound, rounded_op
from valcalc.taylor_model import NULL_SWEEPER, UnitTaylorModel, threshold_sweeper

FN_FIELD = ["v - v^3/3 - w + 0.35", "(v + 0.7 - 2*w)/12.5"]


def fn_field():
    return parse_function(FN_FIELD, ["v", "w"])


def fn_parametrised():
    return parse_function(["v - v^3/3 - w + 0.1*Iext", "(v + 0.7 - 2*w)/12.5"], ["Iext", "v", "w"])


def contains_sqrt(b: Bounds, square: Fraction, sign: int) -> bool:
    """Exact test that ``b`` contains sign*sqrt(square)."""
    lo, hi = Fraction(b.lower), Fraction(b.upper)
    if sign > 0:
        return lo <= 0 <= hi if square == 0 else (hi > 0 and hi * hi >= square and (lo <= 0 or lo * lo <= square))
    return hi >= 0 >= lo if square == 0 else (lo < 0 and lo * lo >= square and (hi >= 0 or hi * hi <= square))


# ---------------------------------------------------------------------------
# 1. FN fixed points
# ---------------------------------------------------------------------------


@pytest.mark.criterion(1)
class TestFNFixedPoints:
    @pytest.fixture(scope="class")
    @staticmethod
    def result():
        start = time.perf_counter()
        sols = solve_all(fn_field(), BoxDomain([(-2, 3), (-1, 2)]), SolverConfig(tolerance=1e-12, max_steps=32))
        return sols, time.perf_counter() - start

    def test_three_unique_boxes(self, result):
        sols, _ = result
        assert len(sols) == 3
        assert all(s.unique for s in sols)

    def test_boxes_contain_exact_equilibria(self, result):
        sols, _ = result
        left, middle, right = sols
        # outer equilibria: v = -/+ sqrt(3/2), 2w - 0.7 = v
        assert contains_sqrt(left.box[0], Fraction(3, 2), -1)
        assert contains_sqrt(Bounds(2 * Fraction(left.box[1].lower) - Fraction(7, 10),
                                    2 * Fraction(left.box[1].upper) - Fraction(7, 10)), Fraction(3, 2), -1)
        assert contains_sqrt(right.box[0], Fraction(3, 2), 1)
        w_lo, w_hi = Fraction(right.box[1].lower), Fraction(right.box[1].upper)
        assert contains_sqrt(Bounds(2 * w_lo - Fraction(7, 10), 2 * w_hi - Fraction(7, 10)), Fraction(3, 2), 1)
        assert middle.box[0].contains(0)
        assert middle.box[1].contains(Fraction(7, 20))

    def test_printed_digits(self, result):
        sols, _ = result
        assert sols[0].box[0].contains(-1.224744871391589)
        assert sols[0].box[1].contains(-0.2623724356957945)
        assert sols[2].box[0].contains(1.224744871391589)
        assert sols[2].box[1].contains(0.9623724356957945)

    def test_widths(self, result):
        sols, _ = result
        assert max(b.width() for s in sols for b in s.box) <= 1e-11

    def test_runtime(self, result):
        assert result[1] < 5.0


# ---------------------------------------------------------------------------
# 2. FN implicit branch
# ---------------------------------------------------------------------------

REFERENCE_RANGE = [(1.1712915, 1.2720745), (0.93564590, 0.98603711)]


def widened(lo: float, hi: float, fraction: float = 0.1) -> tuple[float, float]:
    w = hi - lo
    return lo - fraction * w, hi + fraction * w


@pytest.mark.criterion(2)
class TestFNImplicit:
    @pytest.fixture(scope="class")
    @staticmethod
    def result():
        start = time.perf_counter()
        patch = implicit(fn_parametrised(), BoxDomain([(3, 4)]), [Bounds(1, 1.5), Bounds(0.75, 1.25)])
        return patch, time.perf_counter() - start

    def test_range_within_widened_reference_range(self, result):
        patch, _ = result
        for r, (lo, hi) in zip(patch.range(), REFERENCE_RANGE):
            wlo, whi = widened(lo, hi)
            assert wlo <= r.lower and r.upper <= whi

    def test_pointwise_contains_scalar_roots(self, result):
        patch, _ = result
        for k in range(20):
            iext = Fraction(3) + Fraction(k, 19)
            f = parse_function(["v - v^3/3 - w + 0.1*I", "(v + 0.7 - 2*w)/12.5"], ["v", "w"], {"I": iext})
            root = solve(f, BoxDomain([(1, 1.5), (0.75, 1.25)]), SolverConfig(tolerance=1e-12))
            value = patch.evaluate([iext])
            assert root.unique
            for v, r in zip(value, root.box):
                assert r.refines(v)
            # reduced scalar equation on w = (v + 0.7)/2, solved by bracketing
            c = float(iext) / 10
            v_star = brentq(lambda v: v - v**3 / 3 - (v + 0.7) / 2 + c, 1.0, 1.5, xtol=1e-15, rtol=1e-15)
            assert value[0].lower - 1e-12 <= v_star <= value[0].upper + 1e-12

    def test_wide_candidate_is_unknown(self):
        with pytest.raises(UnknownSolutionError):
            implicit(fn_parametrised(), BoxDomain([(3, 4)]), [Bounds(0.75, 1.75), Bounds(0.5, 1.5)])

    def test_runtime(self, result):
        assert result[1] < 10.0


# ---------------------------------------------------------------------------
# 3. FN flow step
# ---------------------------------------------------------------------------

REFERENCE_WIDTHS = (0.098, 0.0148)


def fn_rhs(_t, y):
    v, w = y
    return [v - v**3 / 3 - w + 0.35, (v + 0.7 - 2 * w) / 12.5]


@pytest.mark.criterion(3)
class TestFNFlowStep:
    @pytest.fixture(scope="class")
    @staticmethod
    def singleton():
        start = time.perf_counter()
        patch = flow_step(fn_field(), [Bounds(0), Bounds(0)], 1.0, IntegratorConfig(tolerance=1e-3))
        return patch, time.perf_counter() - start

    def test_reduced_step(self, singleton):
        patch, _ = singleton
        h = patch.domain.intervals[-1][1]
        assert 0.125 <= h <= 0.5

    def test_contains_reference_trajectory(self, singleton):
        patch, _ = singleton
        h = patch.domain.intervals[-1][1]
        times = [h * k / 9 for k in range(10)]
        ref = solve_ivp(fn_rhs, (0, h), [0.0, 0.0], method="DOP853", rtol=1e-12, atol=1e-12,
                        t_eval=times, dense_output=False)
        assert ref.success
        rng = patch.range()
        for k, t in enumerate(times):
            value = patch.evaluate([0.0, 0.0, t])
            for i in range(2):
                y = ref.y[i][k]
                assert value[i].lower - 1e-11 <= y <= value[i].upper + 1e-11
                assert rng[i].lower <= y <= rng[i].upper

    def test_range_widths_match_reference(self, singleton):
        patch, _ = singleton
        for r, ref in zip(patch.range(), REFERENCE_WIDTHS):
            assert ref / 4 <= r.width() <= ref * 4

    def test_unit_box_step(self):
        start = time.perf_counter()
        patch = flow_step(fn_field(), [Bounds(0, 1), Bounds(0, 1)], 1.0, IntegratorConfig(tolerance=1e-3))
        elapsed = time.perf_counter() - start
        assert patch.domain.intervals[-1][1] <= 0.125
        assert elapsed < 10.0

    def test_runtime(self, singleton):
        assert singleton[1] < 10.0


# ---------------------------------------------------------------------------
# 4. Picard vs Taylor
# ---------------------------------------------------------------------------


@pytest.mark.criterion(4)
class TestPicardVersusTaylor:
    @pytest.fixture(scope="class")
    @staticmethod
    def patches():
        f = parse_function(["y"], ["y"])
        sweeper = threshold_sweeper(1e-15)
        common = {"tolerance": 1.0, "sweeper": sweeper}
        picard = flow_step(f, [Bounds(1)], 0.25, IntegratorConfig(kind="picard", max_iterations=12, **common))
        taylor = flow_step(f, [Bounds(1)], 0.25, IntegratorConfig(kind="taylor", order=8, **common))
        return picard, taylor

    def test_full_step_taken(self, patches):
        for p in patches:
            assert p.domain.intervals[-1] == (0.0, 0.25)

    def test_taylor_error_not_larger(self, patches):
        picard, taylor = patches
        assert taylor.errors[0] <= picard.errors[0]

    def test_both_contain_exp_quarter(self, patches):
        e = math.exp(0.25)
        lo, hi = math.nextafter(e, -math.inf), math.nextafter(e, math.inf)
        for p in patches:
            v = p.evaluate([1.0, 0.25])[0]
            assert v.lower <= lo and hi <= v.upper


# ---------------------------------------------------------------------------
# 5. Inclusion-property suite
# ---------------------------------------------------------------------------

TRIALS = 10_000
N_ARGS = 2
INDICES = [a for a in indices_up_to(N_ARGS, 3)]


def random_model(rng: random.Random, max_terms: int = 4, scale: float = 1.0) -> UnitTaylorModel:
    """Random model with dyadic (hence exactly rational) coefficients."""
    coeffs = {}
    for _ in range(rng.randint(1, max_terms)):
        coeffs[rng.choice(INDICES)] = rng.randint(-1024, 1024) / 1024 * scale
    error = rng.choice([0.0, rng.randint(0, 1024) / 2**20 * scale])
    return UnitTaylorModel(N_ARGS, coeffs, error, NULL_SWEEPER)


def unit_model(rng: random.Random) -> UnitTaylorModel:
    """Random model whose range lies in [-1, 1]."""
    m = random_model(rng)
    total = sum(abs(c) for c in m.coefficients.values()) + m.error
    if total > 1:
        s = 2.0 ** -math.ceil(math.log2(total))
        m = UnitTaylorModel(N_ARGS, {a: c * s for a, c in m.coefficients.items()}, m.error * s, NULL_SWEEPER)
    return m


def random_point(rng: random.Random) -> tuple[Fraction, ...]:
    q = rng.randint(1, 64)
    return tuple(Fraction(rng.randint(-q, q), q) for _ in range(N_ARGS))


def exact_poly(model: UnitTaylorModel, z) -> Fraction:
    total = Fraction(0)
    for a, c in model.coefficients.items():
        term = Fraction(c)
        for zi, k in zip(z, a):
            term *= zi**k
        total += term
    return total


def represented_value(rng: random.Random, model: UnitTaylorModel, z) -> Fraction:
    """Value at z of some function the model represents."""
    e = Fraction(model.error)
    delta = rng.choice([e, -e, e * Fraction(rng.randint(-64, 64), 64)])
    return exact_poly(model, z) + delta


def encloses(model: UnitTaylorModel, z, value: Fraction) -> bool:
    return abs(value - exact_poly(model, z)) <= Fraction(model.error)


iv.prec = 200


def _iv(q: Fraction):
    return iv.mpf(q.numerator) / q.denominator


def encloses_interval(model: UnitTaylorModel, z, enclosure) -> bool:
    c, e = exact_poly(model, z), Fraction(model.error)
    return (_iv(c - e) <= enclosure) is True and (enclosure <= _iv(c + e)) is True


def _violations(check, seed: int) -> int:
    rng = random.Random(seed)
    return sum(0 if check(rng) else 1 for _ in range(TRIALS))


@pytest.mark.criterion(5)
class TestInclusionProperty:
    def test_add(self):
        def check(rng):
            a, b = random_model(rng), random_model(rng)
            z = random_point(rng)
            return encloses(a + b, z, represented_value(rng, a, z) + represented_value(rng, b, z))

        assert _violations(check, 1) == 0

    def test_mul(self):
        def check(rng):
            a, b = random_model(rng), random_model(rng)
            z = random_point(rng)
            return encloses(a * b, z, represented_value(rng, a, z) * represented_value(rng, b, z))

        assert _violations(check, 2) == 0

    @pytest.mark.parametrize("name", ["exp", "sin"])
    def test_apply_analytic(self, name):
        fn = getattr(iv, name)

        def check(rng):
            a = random_model(rng, max_terms=3, scale=0.25).with_sweeper(threshold_sweeper(1e-9))
            z = random_point(rng)
            return encloses_interval(a.apply_analytic(name), z, fn(_iv(represented_value(rng, a, z))))

        assert _violations(check, 3 if name == "exp" else 4) == 0

    def test_antidifferentiate(self):
        def check(rng):
            a = random_model(rng)
            z = random_point(rng)
            j = rng.randrange(N_ARGS)
            e = Fraction(a.error) * Fraction(rng.randint(-64, 64), 64)
            # exact antiderivative of p + e in z_j, vanishing at z_j = 0
            total = e * z[j]
            for alpha, c in a.coefficients.items():
                term = Fraction(c) / (alpha[j] + 1)
                for i, (zi, k) in enumerate(zip(z, alpha)):
                    term *= zi ** (k + 1 if i == j else k)
                total += term
            return encloses(a.antidifferentiate(j), z, total)

        assert _violations(check, 5) == 0

    def test_compose(self):
        def check(rng):
            outer = random_model(rng)
            inner = [unit_model(rng) for _ in range(N_ARGS)]
            z = random_point(rng)
            y = [represented_value(rng, g, z) for g in inner]
            return encloses(outer.compose(inner), z, represented_value(rng, outer, y))

        assert _violations(check, 6) == 0

    def test_split(self):
        def check(rng):
            a = random_model(rng)
            z = random_point(rng)
            j = rng.randrange(N_ARGS)
            half = rng.choice(["lower", "upper"])
            shift = Fraction(-1, 2) if half == "lower" else Fraction(1, 2)
            zz = tuple(zi / 2 + shift if i == j else zi for i, zi in enumerate(z))
            return encloses(a.split_restrict(j, half), z, represented_value(rng, a, zz))

        assert _violations(check, 7) == 0

    def test_sweep(self):
        def check(rng):
            a = random_model(rng, max_terms=8)
            z = random_point(rng)
            return encloses(a.sweep(threshold_sweeper(0.25)), z, represented_value(rng, a, z))

        assert _violations(check, 8) == 0


# ---------------------------------------------------------------------------
# 6. Rounded-arithmetic sandwich
# ---------------------------------------------------------------------------

PAIRS = 100_000


def random_float(rng: random.Random) -> float:
    kind = rng.random()
    if kind < 0.1:
        return rng.choice([0.0, -0.0, 1.0, -1.0, 5e-324, 2.2250738585072014e-308, 0.1, 1 / 3])
    sign = rng.choice([-1.0, 1.0])
    exponent = rng.randint(-1074, 1000) if kind < 0.3 else rng.randint(-60, 60)
    return sign * math.ldexp(rng.random() + 0.5, exponent)


def random_pair(rng: random.Random) -> tuple[float, float]:
    x = random_float(rng)
    if rng.random() < 0.2:
        # nearby operands exercise cancellation
        y = x * (1 + rng.choice([-1, 1]) * math.ldexp(rng.random(), -rng.randint(1, 52)))
        return x, y
    return x, random_float(rng)


EXACT = {
    "add": lambda a, b: a + b,
    "sub": lambda a, b: a - b,
    "mul": lambda a, b: a * b,
    "div": lambda a, b: a / b,
}


def _finite_fraction(x: float) -> Fraction | None:
    return Fraction(x) if math.isfinite(x) else None


@pytest.mark.criterion(6)
class TestRoundedSandwich:
    @pytest.mark.parametrize("op", ["add", "sub", "mul", "div"])
    def test_sandwich(self, op):
        rng = random.Random({"add": 11, "sub": 12, "mul": 13, "div": 14}[op])
        violations = checked = 0
        while checked < PAIRS:
            x, y = random_pair(rng)
            if op == "div" and y == 0:
                continue
            checked += 1
            exact = EXACT[op](Fraction(x), Fraction(y))
            down = rounded_op(op, "down", x, y)
            up = rounded_op(op, "up", x, y)
            nearest = rounded_op(op, "nearest", x, y)
            ok = (down == -math.inf or Fraction(down) <= exact) and (up == math.inf or exact <= Fraction(up))
            if math.isfinite(nearest):
                bound = op_error_bound(x, op, y)
                ok = ok and (bound == math.inf or abs(Fraction(nearest) - exact) <= Fraction(bound))
            violations += not ok
        assert violations == 0


# ---------------------------------------------------------------------------
# 7. Interval-extension dependency example
# ---------------------------------------------------------------------------


@pytest.mark.criterion(7)
class TestDependencyExample:
    def test_natural_extension_is_wide(self):
        f = parse_function(["x*(1-x)"], ["x"])
        r = f.evaluate_bounds([Bounds(0, 1)])[0]
        assert r.lower <= 0 and r.upper >= 1

    def test_rearranged_form_is_tight(self):
        f = parse_function(["1/4 - (1/2 - x)^2"], ["x"])
        r = f.evaluate_bounds([Bounds(0, 1)])[0]
        assert -(2**-20) <= r.lower and r.upper <= 0.25 + 2**-20

    @pytest.mark.parametrize("degree", [2, 3, 6])
    def test_taylor_model_patch(self, degree):
        from valcalc.taylor_model import graded_sweeper

        f = parse_function(["x*(1-x)"], ["x"])
        patch = patch_from_function(f, BoxDomain([(0, 1)]), graded_sweeper(degree))
        r = patch.range()[0]
        assert r.lower <= 0 and r.upper >= 0.25
        assert -0.05 <= r.lower and r.upper <= 0.30


# ---------------------------------------------------------------------------
# 8. AD correctness
# ---------------------------------------------------------------------------

RATIONAL_CORPUS = [
    "x", "x^2", "x^3 - 2*x + 1", "x*y", "x^2*y - y^3", "x*y*z", "(x + y)^4", "x^5 - z^2*x",
    "1/x", "x/y", "(x - y)/(x + 2*y)", "1/(1 + x^2)", "x^-2 + y^-3", "(x*y - z)/(z^2 + 1)",
    "x^2/(y^2 + z^2)", "3*x^4 - 2*x^2*y^2 + y^4", "(2*x + 3)^3/(y + 5)", "x*(1 - x)*(2 - y)",
    "1/4 - (1/2 - x)^2", "(x + y + z)^3", "x/(1 + y/(1 + z))", "(x^2 - 1)/(x^2 + 1)",
    "7/3*x^3*y - 5/2*z", "(x - 0.7)*(y + 0.35)/12.5", "x - x^3/3 - y + 0.35", "(x + 0.7 - 2*y)/12.5",
    "x^6", "1/(x*y*z)", "(y - x^2)^2 + (1 - x)^2/100", "x*y + y*z + z*x - x*y*z",
]
TRANSCENDENTAL_CORPUS = [
    "exp(x)", "sin(x)", "cos(y)", "exp(x*y)", "sin(x)*cos(y)", "log(1 + x^2)", "sqrt(x^2 + y^2 + 1)",
    "atan(x)", "tan(x/4)", "exp(-x^2)*y", "log(x + 2)*z", "sin(x + y + z)", "cos(x)^2 + sin(x)^2",
    "exp(sin(x))", "sqrt(1 + exp(y))", "atan(x*y)", "x*exp(z)", "log(exp(x) + 1)", "sin(x)/(2 + cos(y))",
    "exp(x)/(1 + exp(x))",
]
VARS = ["x", "y", "z"]
RATIONAL_POINT = (Fraction(1, 3), Fraction(-2, 5), Fraction(3, 7))
DEGREE = 3
SYMPY_LOCALS = {"atan": sympy.atan, "log": sympy.log, "exp": sympy.exp, "sqrt": sympy.sqrt}


def sympy_expr(text: str):
    return sympy.sympify(text.replace("^", "**"), locals=SYMPY_LOCALS, rational=True)


def sympy_derivative(expr, alpha):
    symbols = sympy.symbols(VARS)
    args = [s for s, k in zip(symbols, alpha) for _ in range(k)]
    return sympy.diff(expr, *args) if args else expr


def sympy_at(expr, point):
    symbols = sympy.symbols(VARS)
    return expr.subs({s: sympy.Rational(p.numerator, p.denominator) for s, p in zip(symbols, point)})


def as_function(text: str) -> ExpressionFunction:
    return ExpressionFunction(3, [parse_expression(text, VARS)], VARS)


@pytest.mark.criterion(8)
class TestADCorrectness:
    def test_corpus_size(self):
        assert len(RATIONAL_CORPUS) + len(TRANSCENDENTAL_CORPUS) == 50

    @pytest.mark.parametrize("text", RATIONAL_CORPUS)
    def test_rational_exact(self, text):
        d = as_function(text).differential(list(RATIONAL_POINT), DEGREE)[0]
        expr = sympy_expr(text)
        for alpha in indices_up_to(3, DEGREE):
            expected = sympy_at(sympy_derivative(expr, alpha), RATIONAL_POINT)
            got = extract_derivative(d, alpha)
            assert isinstance(got, Fraction)
            assert got == Fraction(int(sympy.numer(expected)), int(sympy.denom(expected))), (text, alpha)

    @pytest.mark.parametrize("text", TRANSCENDENTAL_CORPUS)
    def test_transcendental_contains_symbolic(self, text):
        point = [Bounds(p) for p in RATIONAL_POINT]
        d = as_function(text).differential(point, DEGREE)[0]
        expr = sympy_expr(text)
        for alpha in indices_up_to(3, DEGREE):
            exact = sympy_at(sympy_derivative(expr, alpha), RATIONAL_POINT)
            value = Fraction(str(sympy.N(exact, 50)))
            enclosure = extract_derivative(d, alpha)
            slack = Fraction(1, 10**45)
            assert enclosure.lower - slack <= value <= enclosure.upper + slack, (text, alpha)

    @pytest.mark.parametrize("text", RATIONAL_CORPUS + TRANSCENDENTAL_CORPUS)
    def test_finite_differences(self, text):
        f = as_function(text)
        x0 = [float(p) for p in RATIONAL_POINT]
        grad = f.differential(x0, 1)[0]
        h = 1e-4
        for j in range(3):
            up = list(x0)
            dn = list(x0)
            up[j] += h
            dn[j] -= h
            fd = (f.evaluate(up)[0] - f.evaluate(dn)[0]) / (2 * h)
            ad = extract_derivative(grad, tuple(1 if k == j else 0 for k in range(3)))
            assert abs(ad - fd) <= 1e-5 * max(abs(ad), 1.0), (text, j, ad, fd)

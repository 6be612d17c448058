"""Graded differential algebra for forward-mode automatic differentiation.

A :class:`Differential` stores the Taylor coefficients c_alpha of a function
about a point, truncated at total degree ``degree``.  The partial derivative
for the multi-index alpha is recovered as c_alpha * prod(alpha_i!).  Storing
series coefficients rather than derivatives keeps multiplication a plain
truncated Cauchy product.

:class:`PowerSeries` is the univariate analogue whose coefficients may
themselves be differentials; the Taylor flow integrator uses it to carry a
time expansion with spatial derivatives attached to each coefficient.
"""

from __future__ import annotations

from fractions import Fraction
from math import factorial, prod

from .algebra import apply_unary, constant_like, taylor_coefficients
from .errors import DomainError, ShapeError
from .multiindex import MultiIndex, format_monomial, graded_revlex_key
from .numerics import Bounds


def _is_zero(c) -> bool:
    if isinstance(c, Bounds):
        return c.lower == 0 and c.upper == 0
    if isinstance(c, (int, float, Fraction)):
        return c == 0
    return False


class Differential:
    """Truncated multivariate Taylor expansion with scalar coefficients.

    Args:
        argument_count: number of variables n.
        degree: degree cap d; every stored index satisfies |alpha| <= d.
        coefficients: mapping alpha -> coefficient.
        zero: scalar prototype fixing the coefficient algebra.
    """

    __slots__ = ("argument_count", "degree", "coefficients", "zero")

    def __init__(self, argument_count: int, degree: int, coefficients=None, zero=Fraction(0)):
        self.argument_count = argument_count
        self.degree = degree
        self.zero = zero
        self.coefficients: dict[tuple[int, ...], object] = {}
        if coefficients:
            for alpha, c in dict(coefficients).items():
                alpha = tuple(alpha)
                if len(alpha) != argument_count:
                    raise ShapeError("multi-index length differs from argument count")
                if sum(alpha) > degree:
                    raise ShapeError(f"index {alpha} exceeds degree cap {degree}")
                if not _is_zero(c):
                    self.coefficients[alpha] = c

    @classmethod
    def _raw(cls, n: int, d: int, coeffs: dict, zero) -> "Differential":
        out = object.__new__(cls)
        out.argument_count = n
        out.degree = d
        out.coefficients = coeffs
        out.zero = zero
        return out

    # -- construction ---------------------------------------------------------
    @classmethod
    def constant(cls, value, argument_count: int, degree: int) -> "Differential":
        zero = constant_like(value, 0)
        return cls(argument_count, degree, {(0,) * argument_count: value}, zero)

    @classmethod
    def variable(cls, index: int, value, argument_count: int, degree: int) -> "Differential":
        if not 0 <= index < argument_count:
            raise IndexError(f"variable index {index} out of range for {argument_count} arguments")
        if degree < 1:
            raise ShapeError("variables need degree cap at least 1")
        zero = constant_like(value, 0)
        coeffs = {(0,) * argument_count: value}
        coeffs[tuple(1 if i == index else 0 for i in range(argument_count))] = constant_like(value, 1)
        return cls(argument_count, degree, coeffs, zero)

    @classmethod
    def variables(cls, values, degree: int) -> list["Differential"]:
        values = list(values)
        n = len(values)
        return [cls.variable(i, v, n, degree) for i, v in enumerate(values)]

    def create_constant(self, value) -> "Differential":
        return Differential.constant(constant_like(self.zero, value), self.argument_count, self.degree)

    def create_zero(self) -> "Differential":
        return Differential._raw(self.argument_count, self.degree, {}, self.zero)

    # -- access ---------------------------------------------------------------
    @property
    def value(self):
        return self.coefficients.get((0,) * self.argument_count, self.zero)

    def __getitem__(self, alpha):
        alpha = tuple(alpha)
        if sum(alpha) > self.degree:
            raise ShapeError(f"index {alpha} exceeds degree cap {self.degree}")
        return self.coefficients.get(alpha, self.zero)

    def terms(self) -> list[tuple[MultiIndex, object]]:
        """Stored (alpha, coefficient) pairs in graded reverse-lex order."""
        keys = sorted(self.coefficients, key=graded_revlex_key)
        return [(MultiIndex(k), self.coefficients[k]) for k in keys]

    def gradient(self) -> list:
        n = self.argument_count
        return [self[tuple(1 if i == j else 0 for i in range(n))] for j in range(n)]

    def extract_derivative(self, alpha):
        """Partial derivative d^|alpha| f / dx^alpha at the expansion point."""
        alpha = tuple(alpha)
        if len(alpha) != self.argument_count:
            raise ShapeError("multi-index length differs from argument count")
        if sum(alpha) > self.degree:
            raise ShapeError(f"derivative order {sum(alpha)} exceeds degree cap {self.degree}")
        c = self[alpha]
        scale = prod(factorial(a) for a in alpha)
        return c * scale if scale != 1 else c

    def grade(self, i: int) -> "Differential":
        return Differential._raw(
            self.argument_count, self.degree,
            {a: c for a, c in self.coefficients.items() if sum(a) == i}, self.zero)

    def truncate(self, d: int) -> "Differential":
        return Differential._raw(
            self.argument_count, self.degree,
            {a: c for a, c in self.coefficients.items() if sum(a) <= d}, self.zero)

    # -- arithmetic -------------------------------------------------------------
    def _check(self, other: "Differential") -> None:
        if other.argument_count != self.argument_count or other.degree != self.degree:
            raise ShapeError(
                f"differential shapes differ: ({self.argument_count},{self.degree}) vs "
                f"({other.argument_count},{other.degree})")

    def _lift(self, other):
        if isinstance(other, Differential):
            self._check(other)
            return other
        if isinstance(other, (int, float, Fraction, Bounds)):
            return self.create_constant(other)
        return None

    def __pos__(self) -> "Differential":
        return self

    def __neg__(self) -> "Differential":
        return Differential._raw(self.argument_count, self.degree,
                                 {a: -c for a, c in self.coefficients.items()}, self.zero)

    def __add__(self, other) -> "Differential":
        other = self._lift(other)
        if other is None:
            return NotImplemented
        out = dict(self.coefficients)
        for a, c in other.coefficients.items():
            if a in out:
                v = out[a] + c
                if _is_zero(v) and not isinstance(v, Bounds):
                    del out[a]
                else:
                    out[a] = v
            else:
                out[a] = c
        return Differential._raw(self.argument_count, self.degree, out, self.zero)

    __radd__ = __add__

    def __sub__(self, other) -> "Differential":
        other = self._lift(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "Differential":
        other = self._lift(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def _scale(self, s) -> "Differential":
        return Differential._raw(self.argument_count, self.degree,
                                 {a: c * s for a, c in self.coefficients.items()}, self.zero)

    def __mul__(self, other) -> "Differential":
        if isinstance(other, (int, float, Fraction, Bounds)):
            return self._scale(constant_like(self.zero, other) if not isinstance(other, int) else other)
        if not isinstance(other, Differential):
            return NotImplemented
        self._check(other)
        d = self.degree
        out: dict = {}
        other_items = [(b, sum(b), cb) for b, cb in other.coefficients.items()]
        for a, ca in self.coefficients.items():
            da = sum(a)
            for b, db, cb in other_items:
                if da + db > d:
                    continue
                key = tuple(x + y for x, y in zip(a, b))
                t = ca * cb
                out[key] = out[key] + t if key in out else t
        return Differential._raw(self.argument_count, d, out, self.zero)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Differential":
        if isinstance(other, Differential):
            return self * other.rec()
        if isinstance(other, (int, float, Fraction, Bounds)):
            if isinstance(other, (int, float, Fraction)) and other == 0:
                raise DomainError("division by zero")
            inv = apply_unary("rec", constant_like(self.zero, other))
            return self._scale(inv)
        return NotImplemented

    def __rtruediv__(self, other) -> "Differential":
        return self.create_constant(other) * self.rec()

    def __pow__(self, k: int) -> "Differential":
        return self.pow(k)

    def pow(self, k: int) -> "Differential":
        if k < 0:
            return self.pow(-k).rec()
        result = self.create_constant(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    # -- analytic functions ------------------------------------------------------
    def apply_analytic(self, name: str, exponent: int | None = None) -> "Differential":
        """Compose the univariate function ``name`` with this expansion."""
        c = self.value
        coeffs = taylor_coefficients(name, c, self.degree, exponent)
        y = self - self.create_constant(c)
        result = self.create_constant(coeffs[self.degree]) if self.degree < len(coeffs) else self.create_zero()
        for k in range(self.degree - 1, -1, -1):
            result = result * y + self.create_constant(coeffs[k])
        return result

    def exp(self) -> "Differential":
        return self.apply_analytic("exp")

    def log(self) -> "Differential":
        return self.apply_analytic("log")

    def sin(self) -> "Differential":
        return self.apply_analytic("sin")

    def cos(self) -> "Differential":
        return self.apply_analytic("cos")

    def tan(self) -> "Differential":
        return self.apply_analytic("tan")

    def atan(self) -> "Differential":
        return self.apply_analytic("atan")

    def sqrt(self) -> "Differential":
        return self.apply_analytic("sqrt")

    def rec(self) -> "Differential":
        return self.apply_analytic("rec")

    def abs(self) -> "Differential":
        return self.apply_analytic("abs")

    def hlf(self) -> "Differential":
        return self._scale(constant_like(self.zero, Fraction(1, 2)))

    def sqr(self) -> "Differential":
        return self * self

    def _select(self, other, want_max: bool) -> "Differential":
        other = self._lift(other)
        a, b = self.value, other.value
        if isinstance(a, Bounds) or isinstance(b, Bounds):
            a, b = Bounds(a), Bounds(b)
            if a.lower > b.upper:
                first = True
            elif a.upper < b.lower:
                first = False
            else:
                raise DomainError("max/min of differentials with overlapping values")
        else:
            if a == b:
                raise DomainError("max/min is not differentiable where the arguments agree")
            first = a > b
        return self if first == want_max else other

    def max(self, other) -> "Differential":
        return self._select(other, True)

    def min(self, other) -> "Differential":
        return self._select(other, False)

    # -- calculus -------------------------------------------------------------
    def derivative(self, j: int) -> "Differential":
        """Expansion of the partial derivative in x_j (top grade becomes zero)."""
        out = {}
        for a, c in self.coefficients.items():
            if a[j] == 0:
                continue
            b = a[:j] + (a[j] - 1,) + a[j + 1:]
            out[b] = c * a[j]
        return Differential._raw(self.argument_count, self.degree, out, self.zero)

    def antiderivative(self, j: int) -> "Differential":
        """Term-wise antiderivative in x_j, truncated at the degree cap."""
        out = {}
        for a, c in self.coefficients.items():
            if sum(a) + 1 > self.degree:
                continue
            b = a[:j] + (a[j] + 1,) + a[j + 1:]
            out[b] = c / (a[j] + 1)
        return Differential._raw(self.argument_count, self.degree, out, self.zero)

    # -- text -------------------------------------------------------------------
    def __eq__(self, other) -> bool:
        if not isinstance(other, Differential):
            return NotImplemented
        if (self.argument_count, self.degree) != (other.argument_count, other.degree):
            return False
        keys = set(self.coefficients) | set(other.coefficients)
        return all(self[k] == other[k] for k in keys)

    __hash__ = None

    def __repr__(self) -> str:
        return f"Differential({self.argument_count}, {self.degree}, {dict(self.terms())!r})"

    def __str__(self) -> str:
        if not self.coefficients:
            return "0"
        parts = []
        for alpha, c in reversed(self.terms()):
            mono = format_monomial(alpha)
            parts.append(f"{c}*{mono}" if mono else f"{c}")
        return " + ".join(parts)


def make_variable(i: int, value, n: int, d: int) -> Differential:
    return Differential.variable(i, value, n, d)


def make_constant(value, n: int, d: int) -> Differential:
    return Differential.constant(value, n, d)


def extract_derivative(a: Differential, alpha) -> object:
    return a.extract_derivative(alpha)


class PowerSeries:
    """Univariate power series sum_k coeffs[k] t^k truncated at ``order``.

    Coefficients may belong to any algebra closed under +, -, * (floats,
    bounds, differentials).
    """

    __slots__ = ("coeffs", "order")

    def __init__(self, coeffs, order: int | None = None):
        coeffs = list(coeffs)
        if order is None:
            order = len(coeffs) - 1
        if len(coeffs) < order + 1:
            zero = constant_like(coeffs[0], 0)
            coeffs = coeffs + [zero] * (order + 1 - len(coeffs))
        self.coeffs = coeffs[: order + 1]
        self.order = order

    def create_constant(self, value) -> "PowerSeries":
        proto = self.coeffs[0]
        zero = constant_like(proto, 0)
        c = value if type(value) is type(proto) else constant_like(proto, value)
        return PowerSeries([c] + [zero] * self.order, self.order)

    def __getitem__(self, k: int):
        return self.coeffs[k]

    def _lift(self, other) -> "PowerSeries | None":
        if isinstance(other, PowerSeries):
            if other.order != self.order:
                raise ShapeError("power series orders differ")
            return other
        try:
            return self.create_constant(other)
        except (TypeError, AttributeError):
            return None

    def __neg__(self) -> "PowerSeries":
        return PowerSeries([-c for c in self.coeffs], self.order)

    def __add__(self, other) -> "PowerSeries":
        other = self._lift(other)
        if other is None:
            return NotImplemented
        return PowerSeries([a + b for a, b in zip(self.coeffs, other.coeffs)], self.order)

    __radd__ = __add__

    def __sub__(self, other) -> "PowerSeries":
        other = self._lift(other)
        if other is None:
            return NotImplemented
        return PowerSeries([a - b for a, b in zip(self.coeffs, other.coeffs)], self.order)

    def __rsub__(self, other) -> "PowerSeries":
        other = self._lift(other)
        if other is None:
            return NotImplemented
        return other - self

    def __mul__(self, other) -> "PowerSeries":
        if isinstance(other, (int, float, Fraction, Bounds)):
            return PowerSeries([c * other for c in self.coeffs], self.order)
        other = self._lift(other)
        if other is None:
            return NotImplemented
        a, b = self.coeffs, other.coeffs
        out = []
        for k in range(self.order + 1):
            acc = a[0] * b[k]
            for j in range(1, k + 1):
                acc = acc + a[j] * b[k - j]
            out.append(acc)
        return PowerSeries(out, self.order)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "PowerSeries":
        if isinstance(other, (int, float, Fraction, Bounds)):
            return PowerSeries([c / other for c in self.coeffs], self.order)
        other = self._lift(other)
        if other is None:
            return NotImplemented
        return self * other.rec()

    def __rtruediv__(self, other) -> "PowerSeries":
        return self.create_constant(other) * self.rec()

    def pow(self, k: int) -> "PowerSeries":
        if k < 0:
            return self.pow(-k).rec()
        result = self.create_constant(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    __pow__ = pow

    def apply_analytic(self, name: str) -> "PowerSeries":
        c = self.coeffs[0]
        coeffs = taylor_coefficients(name, c, self.order)
        y = self - self.create_constant(c)
        result = self.create_constant(coeffs[self.order])
        for k in range(self.order - 1, -1, -1):
            result = result * y + self.create_constant(coeffs[k])
        return result

    def __getattr__(self, name):
        if name in ("exp", "log", "sin", "cos", "tan", "atan", "sqrt", "rec", "abs"):
            return lambda: self.apply_analytic(name)
        raise AttributeError(name)

    def hlf(self) -> "PowerSeries":
        return PowerSeries([apply_unary("hlf", c) for c in self.coeffs], self.order)

    def __repr__(self) -> str:
        return f"PowerSeries({self.coeffs!r})"


__all__ = ["Differential", "PowerSeries", "make_variable", "make_constant", "extract_derivative"]

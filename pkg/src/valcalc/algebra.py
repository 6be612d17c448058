"""Operation dispatch shared by every scalar and function algebra.

Expression evaluation, automatic differentiation and Taylor-model
construction all need the same elementary operations on heterogeneous
values: plain floats, exact ``Fraction`` values, :class:`Bounds`,
differentials and Taylor models.  The helpers here pick the right
implementation for each kind.  Transcendental functions of a ``Fraction``
fall back to a float approximation, since the result is irrational.
"""

from __future__ import annotations

import math
from fractions import Fraction

from .errors import DomainError
from .numerics import Bounds, coerce_bounds

UNARY_FUNCTIONS = ("neg", "rec", "sqr", "hlf", "sqrt", "exp", "log", "sin", "cos", "tan", "atan", "abs")
BINARY_FUNCTIONS = ("add", "sub", "mul", "div", "max", "min")


def _float_fn(name: str, x: float) -> float:
    try:
        if name == "exp":
            return math.exp(x)
        if name == "log":
            if x <= 0:
                raise DomainError(f"log of {x}")
            return math.log(x)
        if name == "sqrt":
            if x < 0:
                raise DomainError(f"sqrt of {x}")
            return math.sqrt(x)
        if name == "rec":
            if x == 0:
                raise DomainError("reciprocal of zero")
            return 1.0 / x
        return getattr(math, name)(x)
    except OverflowError:
        return math.inf


def _fraction_fn(name: str, x: Fraction):
    if name == "rec":
        if x == 0:
            raise DomainError("reciprocal of zero")
        return 1 / x
    if name == "abs":
        return abs(x)
    if name == "exp" and x == 0:
        return Fraction(1)
    if name == "log" and x == 1:
        return Fraction(0)
    if name in ("sin", "tan", "atan") and x == 0:
        return Fraction(0)
    if name == "cos" and x == 0:
        return Fraction(1)
    if name == "sqrt":
        if x < 0:
            raise DomainError(f"sqrt of {x}")
        n, d = math.isqrt(x.numerator), math.isqrt(x.denominator)
        if n * n == x.numerator and d * d == x.denominator:
            return Fraction(n, d)
    return _float_fn(name, float(x))


def apply_unary(name: str, x):
    """Apply the named elementary function to a value of any algebra."""
    if name == "neg":
        return -x
    if name == "sqr":
        return x * x
    if name == "hlf":
        return x / 2 if not isinstance(x, Bounds) else x.hlf()
    if isinstance(x, bool):
        x = int(x)
    if isinstance(x, int):
        x = Fraction(x)
    if isinstance(x, float):
        return _float_fn(name, x)
    if isinstance(x, Fraction):
        return _fraction_fn(name, x)
    method = getattr(x, name, None)
    if method is None:
        raise TypeError(f"{type(x).__name__} does not support {name}")
    return method()


def apply_binary(name: str, x, y):
    if name == "add":
        return x + y
    if name == "sub":
        return x - y
    if name == "mul":
        return x * y
    if name == "div":
        if isinstance(y, (int, Fraction, float)) and y == 0:
            raise DomainError("division by zero")
        return x / y
    if name in ("max", "min"):
        if isinstance(x, (int, float, Fraction)) and isinstance(y, (int, float, Fraction)):
            return max(x, y) if name == "max" else min(x, y)
        if not hasattr(x, name):
            x, y = y, x
        return getattr(x, name)(y)
    raise ValueError(f"unknown binary operation {name!r}")


def apply_pow(x, k: int):
    """Integer power in any algebra."""
    if isinstance(x, (int, Fraction)):
        if k < 0 and x == 0:
            raise DomainError("negative power of zero")
        return Fraction(x) ** k
    if isinstance(x, float):
        if k < 0 and x == 0:
            raise DomainError("negative power of zero")
        try:
            return x**k
        except OverflowError:
            return math.inf
    if hasattr(x, "pow"):
        return x.pow(k)
    if k < 0:
        return apply_unary("rec", apply_pow(x, -k))
    if k == 0:
        return constant_like(x, 1)
    result = None
    base = x
    while k:
        if k & 1:
            result = base if result is None else result * base
        k >>= 1
        if k:
            base = base * base
    return result


def constant_like(proto, value):
    """The number ``value`` represented in the algebra of ``proto``."""
    if isinstance(proto, float):
        return float(value) if not isinstance(value, Bounds) else value.mid()
    if isinstance(proto, (int, Fraction)):
        if isinstance(value, float):
            return Fraction(value)
        return Fraction(value)
    if isinstance(proto, Bounds):
        return coerce_bounds(value)
    return proto.create_constant(value)


def _sign_of(c) -> int:
    if isinstance(c, Bounds):
        if c.lower > 0:
            return 1
        if c.upper < 0:
            return -1
        return 0
    return (c > 0) - (c < 0)


def _series_mul(a: list, b: list, n: int) -> list:
    out = []
    for k in range(n + 1):
        acc = a[0] * b[k]
        for j in range(1, k + 1):
            acc = acc + a[j] * b[k - j]
        out.append(acc)
    return out


def _series_div(a: list, b: list, n: int) -> list:
    """Truncated quotient a/b of power series with invertible b[0]."""
    inv0 = apply_unary("rec", b[0])
    q = []
    for k in range(n + 1):
        acc = a[k]
        for j in range(1, k + 1):
            acc = acc - b[j] * q[k - j]
        q.append(acc * inv0)
    return q


def taylor_coefficients(name: str, c, order: int, exponent: int | None = None) -> list:
    """Coefficients f^(k)(c)/k! for k = 0..order, computed in the algebra of ``c``.

    ``c`` may be a float, ``Fraction``, :class:`Bounds`, or any other
    algebra supporting the field operations and the named function.  When
    ``c`` is a set (e.g. a bound on a whole range), each coefficient
    encloses f^(k)(x)/k! for every x in ``c``.
    """
    one = constant_like(c, 1)
    if name == "pow":
        n = int(exponent)
        out = []
        for k in range(order + 1):
            if n >= 0 and k > n:
                out.append(one * 0)
                continue
            binom = Fraction(math.prod(n - i for i in range(k)), math.factorial(k))
            out.append(constant_like(c, binom) * apply_pow(c, n - k))
        return out
    if name == "exp":
        e = apply_unary("exp", c)
        out = [e]
        for k in range(1, order + 1):
            out.append(out[-1] / k)
        return out
    if name == "log":
        out = [apply_unary("log", c)]
        r = apply_unary("rec", c)
        p = one
        for k in range(1, order + 1):
            p = p * r
            term = p / k
            out.append(term if k % 2 == 1 else -term)
        return out
    if name == "rec":
        r = apply_unary("rec", c)
        out = [r]
        for k in range(1, order + 1):
            out.append(-(out[-1] * r))
        return out
    if name == "sqrt":
        s = apply_unary("sqrt", c)
        r = apply_unary("rec", c)
        out = [s]
        coef = Fraction(1)
        p = s
        for k in range(1, order + 1):
            coef = coef * (Fraction(1, 2) - (k - 1)) / k
            p = p * r
            out.append(constant_like(c, coef) * p)
        return out
    if name in ("sin", "cos"):
        s = apply_unary("sin", c)
        co = apply_unary("cos", c)
        cycle = [s, co, -s, -co] if name == "sin" else [co, -s, -co, s]
        out = []
        fact = 1
        for k in range(order + 1):
            if k:
                fact *= k
            out.append(cycle[k % 4] / fact)
        return out
    if name == "tan":
        sin_s = taylor_coefficients("sin", c, order)
        cos_s = taylor_coefficients("cos", c, order)
        return _series_div(sin_s, cos_s, order)
    if name == "atan":
        # d/dt atan(c+t) = 1/(1 + c^2 + 2ct + t^2)
        zero = one * 0
        q = [one + c * c, c * 2, one] + [zero] * order
        g = _series_div([one] + [zero] * order, q, order)
        out = [apply_unary("atan", c)]
        for k in range(1, order + 1):
            out.append(g[k - 1] / k)
        return out
    if name == "abs":
        sign = _sign_of(c)
        if sign == 0:
            raise DomainError("abs is not differentiable at a point that may be zero")
        out = [c if sign > 0 else -c, one if sign > 0 else -one]
        return out[: order + 1] + [one * 0] * max(0, order - 1)
    if name == "neg":
        return ([-c, -one] + [one * 0] * order)[: order + 1]
    if name == "hlf":
        return ([apply_unary("hlf", c), one / 2] + [one * 0] * order)[: order + 1]
    if name == "sqr":
        return ([c * c, c * 2, one] + [one * 0] * order)[: order + 1]
    raise ValueError(f"no Taylor expansion for {name!r}")

"""Directed-rounded binary64 arithmetic, interval bounds and balls.

Python exposes no control over the FPU rounding mode, so downward and upward
results are derived from the round-to-nearest result plus an exact sign test
of the rounding error (error-free transformations for the common range, an
exact ``Fraction`` computation otherwise).  Results are therefore the tightest
possible: ``add_down(1.0, 2.0) == 3.0`` and ``div_up(1.0, 3.0)`` is the float
immediately above 1/3.

Elementary functions on :class:`Bounds` are evaluated by argument reduction
and truncated Taylor series with an explicit remainder, all in interval
arithmetic, so no trust is placed in the platform ``libm``.
"""

from __future__ import annotations

import math
import sys
from functools import lru_cache
from fractions import Fraction
from typing import Union

from .errors import DomainError, NumericalError
from .logic import ValidatedKleenean, bounds_less, bounds_less_equal

INF = math.inf
MAX_FLOAT = sys.float_info.max
MIN_SUBNORMAL = 5e-324
MANTISSA_DIGITS = 52

_SPLIT = 134217729.0  # 2**27 + 1
_SAFE_HI = 2.0**900
_SAFE_LO = 2.0**-900
_nextafter = math.nextafter

Rational = Union[int, Fraction]
Real = Union[int, float, Fraction]


def check_float(x: float) -> float:
    """Validate a value destined to be stored as a rounded float."""
    x = float(x)
    if x != x:
        raise NumericalError("NaN cannot be stored as a rounded float")
    return x


# ---------------------------------------------------------------------------
# Exact rationals
# ---------------------------------------------------------------------------


def to_rational(x: Real) -> Fraction:
    """Exact rational value of an int, float or Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        if not math.isfinite(x):
            raise DomainError(f"{x} has no rational value")
    return Fraction(x)


def _rational_nearest(q: Fraction) -> float:
    try:
        return q.numerator / q.denominator
    except OverflowError:
        return INF if q > 0 else -INF


def rational_down(q: Real) -> float:
    """Largest float not exceeding the rational ``q``."""
    if isinstance(q, float):
        return q
    q = Fraction(q)
    f = _rational_nearest(q)
    if f == INF:
        return MAX_FLOAT
    if f == -INF:
        return -INF
    if Fraction(f) > q:
        f = _nextafter(f, -INF)
    return f


def rational_up(q: Real) -> float:
    """Smallest float not below the rational ``q``."""
    if isinstance(q, float):
        return q
    q = Fraction(q)
    f = _rational_nearest(q)
    if f == -INF:
        return -MAX_FLOAT
    if f == INF:
        return INF
    if Fraction(f) < q:
        f = _nextafter(f, INF)
    return f


def rational_nearest(q: Real) -> float:
    if isinstance(q, float):
        return q
    return _rational_nearest(Fraction(q))


# ---------------------------------------------------------------------------
# Rounded operations
# ---------------------------------------------------------------------------


def _two_sum_err(a: float, b: float, s: float) -> float:
    bb = s - a
    return (a - (s - bb)) + (b - bb)


def _two_prod_err(a: float, b: float, p: float) -> float:
    t = _SPLIT * a
    ah = t - (t - a)
    al = a - ah
    t = _SPLIT * b
    bh = t - (t - b)
    bl = b - bh
    return ((ah * bh - p) + ah * bl + al * bh) + al * bl


def _slow(op: str, a: float, b: float, mode: str) -> float:
    """Reference path: exact rational arithmetic, then directed rounding."""
    if not (math.isfinite(a) and math.isfinite(b)):
        if op == "div" and b == 0:
            raise DomainError("division by zero")
        r = _ieee(op, a, b)
        if r != r:
            raise NumericalError(f"{op}({a}, {b}) is undefined")
        return r
    qa, qb = Fraction(a), Fraction(b)
    if op == "add":
        q = qa + qb
    elif op == "sub":
        q = qa - qb
    elif op == "mul":
        q = qa * qb
    elif op == "div":
        if b == 0:
            raise DomainError("division by zero")
        q = qa / qb
    else:
        raise ValueError(f"unknown operation {op!r}")
    if mode == "down":
        return rational_down(q)
    if mode == "up":
        return rational_up(q)
    return _rational_nearest(q)


def _ieee(op: str, a: float, b: float) -> float:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        if a == 0 or b == 0:
            return 0.0
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown operation {op!r}")


def add_down(a: float, b: float) -> float:
    s = a + b
    if -MAX_FLOAT <= s <= MAX_FLOAT and -INF < a < INF and -INF < b < INF:
        bb = s - a
        if (a - (s - bb)) + (b - bb) < 0:
            return _nextafter(s, -INF)
        return s
    return _slow("add", a, b, "down")


def add_up(a: float, b: float) -> float:
    s = a + b
    if -MAX_FLOAT <= s <= MAX_FLOAT and -INF < a < INF and -INF < b < INF:
        bb = s - a
        if (a - (s - bb)) + (b - bb) > 0:
            return _nextafter(s, INF)
        return s
    return _slow("add", a, b, "up")


def sub_down(a: float, b: float) -> float:
    return add_down(a, -b)


def sub_up(a: float, b: float) -> float:
    return add_up(a, -b)


def _mul_fast_ok(a: float, b: float, p: float) -> bool:
    return _SAFE_LO < abs(p) < _SAFE_HI and abs(a) < _SAFE_HI and abs(b) < _SAFE_HI


def mul_down(a: float, b: float) -> float:
    if a == 0 or b == 0:
        return 0.0
    p = a * b
    if _mul_fast_ok(a, b, p):
        if _two_prod_err(a, b, p) < 0:
            return _nextafter(p, -INF)
        return p
    return _slow("mul", a, b, "down")


def mul_up(a: float, b: float) -> float:
    if a == 0 or b == 0:
        return 0.0
    p = a * b
    if _mul_fast_ok(a, b, p):
        if _two_prod_err(a, b, p) > 0:
            return _nextafter(p, INF)
        return p
    return _slow("mul", a, b, "up")


def _div_direction(a: float, b: float, q: float) -> int:
    """Sign of (a/b - q) for the nearest quotient ``q``, or 2 if unknown."""
    if not (_SAFE_LO < abs(q) < _SAFE_HI and _SAFE_LO < abs(b) < _SAFE_HI
            and _SAFE_LO < abs(a) < _SAFE_HI):
        return 2
    p = q * b
    e = _two_prod_err(q, b, p)
    d = a - p  # exact by Sterbenz
    if d == e:
        return 0
    rem_positive = d > e
    return 1 if rem_positive == (b > 0) else -1


def div_down(a: float, b: float) -> float:
    if b == 0:
        raise DomainError("division by zero")
    if a == 0:
        return 0.0
    q = a / b
    s = _div_direction(a, b, q)
    if s == 2:
        return _slow("div", a, b, "down")
    return _nextafter(q, -INF) if s < 0 else q


def div_up(a: float, b: float) -> float:
    if b == 0:
        raise DomainError("division by zero")
    if a == 0:
        return 0.0
    q = a / b
    s = _div_direction(a, b, q)
    if s == 2:
        return _slow("div", a, b, "up")
    return _nextafter(q, INF) if s > 0 else q


def sqrt_down(a: float) -> float:
    if a < 0:
        raise DomainError("square root of a negative number")
    if a == 0 or a == INF:
        return a
    s = math.sqrt(a)
    if _SAFE_LO < a < _SAFE_HI:
        p = s * s
        e = _two_prod_err(s, s, p)
        d = a - p
        return _nextafter(s, -INF) if d < e else s
    if Fraction(s) ** 2 > Fraction(a):
        return _nextafter(s, -INF)
    return s


def sqrt_up(a: float) -> float:
    if a < 0:
        raise DomainError("square root of a negative number")
    if a == 0 or a == INF:
        return a
    s = math.sqrt(a)
    if _SAFE_LO < a < _SAFE_HI:
        p = s * s
        e = _two_prod_err(s, s, p)
        d = a - p
        return _nextafter(s, INF) if d > e else s
    if Fraction(s) ** 2 < Fraction(a):
        return _nextafter(s, INF)
    return s


_OPS = {
    ("add", "down"): add_down,
    ("add", "up"): add_up,
    ("sub", "down"): sub_down,
    ("sub", "up"): sub_up,
    ("mul", "down"): mul_down,
    ("mul", "up"): mul_up,
    ("div", "down"): div_down,
    ("div", "up"): div_up,
}


def rounded_op(op: str, mode: str, x: float, y: float) -> float:
    """Apply ``op`` in {add, sub, mul, div} rounded ``mode`` in {down, up, nearest}."""
    x = check_float(x)
    y = check_float(y)
    if mode == "nearest":
        if op == "div" and y == 0:
            raise DomainError("division by zero")
        r = _ieee(op, x, y)
        if r != r:
            raise NumericalError(f"{op}({x}, {y}) is undefined")
        return r
    try:
        fn = _OPS[(op, mode)]
    except KeyError:
        raise ValueError(f"unknown operation/mode {op!r}/{mode!r}") from None
    return fn(x, y)


def op_error_bound(x: float, op: str, y: float) -> float:
    """Upper bound on |exact(x op y) - nearest(x op y)|.

    Computed as half the width of the directed-rounding bracket.
    """
    down = rounded_op(op, "down", x, y)
    up = rounded_op(op, "up", x, y)
    return div_up(sub_up(up, down), 2.0)


def ulp(z: float) -> float:
    """Spacing 2**(floor(log2|z|) - 52) of binary64 numbers near ``z``."""
    z = check_float(z)
    if z == 0 or not math.isfinite(z):
        raise DomainError("ulp is defined for finite nonzero values only")
    _, e = math.frexp(abs(z))
    return max(math.ldexp(1.0, e - 1 - MANTISSA_DIGITS), MIN_SUBNORMAL)


def half_ulp_error(z: float) -> float:
    """Cheaper (coarser) rounding-error bound: half an ulp of the result."""
    if z == 0:
        return 0.0
    return ulp(z) * 0.5 if math.isfinite(z) else INF


def sum_up(values) -> float:
    total = 0.0
    for v in values:
        total = add_up(total, v)
    return total


def _ldexp_down(m: float, k: int) -> float:
    try:
        v = math.ldexp(m, k)
    except OverflowError:
        return MAX_FLOAT if m > 0 else -INF
    if v != 0 and abs(v) >= 2.2250738585072014e-308:
        return v
    if Fraction(v) > Fraction(m) * Fraction(2) ** k:
        v = _nextafter(v, -INF)
    return v


def _ldexp_up(m: float, k: int) -> float:
    try:
        v = math.ldexp(m, k)
    except OverflowError:
        return INF if m > 0 else -MAX_FLOAT
    if v != 0 and abs(v) >= 2.2250738585072014e-308:
        return v
    if Fraction(v) < Fraction(m) * Fraction(2) ** k:
        v = _nextafter(v, INF)
    return v


# ---------------------------------------------------------------------------
# Interval bounds
# ---------------------------------------------------------------------------


def _mk(lower: float, upper: float) -> "Bounds":
    b = object.__new__(Bounds)
    b.lower = lower
    b.upper = upper
    return b


class Bounds:
    """Closed interval ``[lower:upper]`` of reals with float endpoints.

    Arithmetic is outward rounded, so every operation satisfies the
    inclusion property.  Python numbers mix freely: ints and floats are
    exact points, ``Fraction`` values are rounded outward.
    """

    __slots__ = ("lower", "upper")

    def __init__(self, lower: Real, upper: Real | None = None):
        if upper is None:
            if isinstance(lower, Bounds):
                self.lower, self.upper = lower.lower, lower.upper
                return
            upper = lower
        lo = _endpoint_down(lower)
        hi = _endpoint_up(upper)
        if lo > hi:
            raise ValueError(f"empty interval [{lower}:{upper}]")
        self.lower = lo
        self.upper = hi

    # -- construction -----------------------------------------------------
    @classmethod
    def point(cls, x: Real) -> "Bounds":
        return cls(x, x)

    @classmethod
    def centred(cls, centre: float, radius: float) -> "Bounds":
        return _mk(sub_down(centre, radius), add_up(centre, radius))

    @classmethod
    def hull_of(cls, values) -> "Bounds":
        it = iter(values)
        acc = coerce_bounds(next(it))
        for v in it:
            acc = acc.hull(coerce_bounds(v))
        return acc

    def create_constant(self, value: Real) -> "Bounds":
        return coerce_bounds(value)

    def create_zero(self) -> "Bounds":
        return _mk(0.0, 0.0)

    # -- queries ------------------------------------------------------------
    def mid(self) -> float:
        lo, hi = self.lower, self.upper
        if lo == hi:
            return lo
        if lo == -INF or hi == INF:
            if lo == -INF and hi == INF:
                return 0.0
            return lo if hi == INF else hi
        m = lo * 0.5 + hi * 0.5
        if m < lo:
            m = lo
        elif m > hi:
            m = hi
        return m

    def rad(self) -> float:
        """Upper bound on the distance from ``mid()`` to either endpoint."""
        m = self.mid()
        return max(sub_up(self.upper, m), sub_up(m, self.lower))

    def width(self) -> float:
        return sub_up(self.upper, self.lower)

    def mag(self) -> float:
        return max(abs(self.lower), abs(self.upper))

    def mig(self) -> float:
        if self.lower > 0:
            return self.lower
        if self.upper < 0:
            return -self.upper
        return 0.0

    def is_point(self) -> bool:
        return self.lower == self.upper

    def contains(self, x) -> bool:
        """Exact membership test for a real number or containment of bounds."""
        if isinstance(x, Bounds):
            return self.lower <= x.lower and x.upper <= self.upper
        if isinstance(x, Fraction):
            if self.lower != -INF and Fraction(self.lower) > x:
                return False
            if self.upper != INF and Fraction(self.upper) < x:
                return False
            return True
        return self.lower <= x <= self.upper

    __contains__ = contains

    def refines(self, other: "Bounds") -> bool:
        return other.lower <= self.lower and self.upper <= other.upper

    def inside(self, other: "Bounds") -> bool:
        """Strictly inside the interior of ``other``."""
        return other.lower < self.lower and self.upper < other.upper

    def intersection(self, other: "Bounds") -> "Bounds | None":
        lo = max(self.lower, other.lower)
        hi = min(self.upper, other.upper)
        if lo > hi:
            return None
        return _mk(lo, hi)

    def hull(self, other: "Bounds") -> "Bounds":
        return _mk(min(self.lower, other.lower), max(self.upper, other.upper))

    def disjoint(self, other: "Bounds") -> bool:
        return self.upper < other.lower or other.upper < self.lower

    def split(self) -> tuple["Bounds", "Bounds"]:
        m = self.mid()
        return _mk(self.lower, m), _mk(m, self.upper)

    # -- comparisons give Kleeneans --------------------------------------------
    def __lt__(self, other) -> ValidatedKleenean:
        return bounds_less(self, coerce_bounds(other))

    def __le__(self, other) -> ValidatedKleenean:
        return bounds_less_equal(self, coerce_bounds(other))

    def __gt__(self, other) -> ValidatedKleenean:
        return bounds_less(coerce_bounds(other), self)

    def __ge__(self, other) -> ValidatedKleenean:
        return bounds_less_equal(coerce_bounds(other), self)

    def __eq__(self, other) -> bool:
        # Structural identity of the representation, not a real-number test.
        if isinstance(other, Bounds):
            return self.lower == other.lower and self.upper == other.upper
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.lower, self.upper))

    # -- arithmetic -------------------------------------------------------------
    def __pos__(self) -> "Bounds":
        return self

    def __neg__(self) -> "Bounds":
        return _mk(-self.upper, -self.lower)

    def __add__(self, other) -> "Bounds":
        if not isinstance(other, Bounds):
            other = _coerce_or_none(other)
            if other is None:
                return NotImplemented
        return _mk(add_down(self.lower, other.lower), add_up(self.upper, other.upper))

    __radd__ = __add__

    def __sub__(self, other) -> "Bounds":
        if not isinstance(other, Bounds):
            other = _coerce_or_none(other)
            if other is None:
                return NotImplemented
        return _mk(sub_down(self.lower, other.upper), sub_up(self.upper, other.lower))

    def __rsub__(self, other) -> "Bounds":
        other = _coerce_or_none(other)
        if other is None:
            return NotImplemented
        return other - self

    def __mul__(self, other) -> "Bounds":
        if not isinstance(other, Bounds):
            other = _coerce_or_none(other)
            if other is None:
                return NotImplemented
        al, au, bl, bu = self.lower, self.upper, other.lower, other.upper
        if al >= 0 and bl >= 0:
            return _mk(mul_down(al, bl), mul_up(au, bu))
        if au <= 0 and bu <= 0:
            return _mk(mul_down(au, bu), mul_up(al, bl))
        if al >= 0 and bu <= 0:
            return _mk(mul_down(au, bl), mul_up(al, bu))
        if au <= 0 and bl >= 0:
            return _mk(mul_down(al, bu), mul_up(au, bl))
        lo = min(mul_down(al, bl), mul_down(al, bu), mul_down(au, bl), mul_down(au, bu))
        hi = max(mul_up(al, bl), mul_up(al, bu), mul_up(au, bl), mul_up(au, bu))
        return _mk(lo, hi)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Bounds":
        if not isinstance(other, Bounds):
            other = _coerce_or_none(other)
            if other is None:
                return NotImplemented
        bl, bu = other.lower, other.upper
        if bl <= 0 <= bu:
            raise DomainError(f"division by an interval containing zero: {other}")
        al, au = self.lower, self.upper
        if bl == bu:
            if bl > 0:
                return _mk(div_down(al, bl), div_up(au, bl))
            return _mk(div_down(au, bl), div_up(al, bl))
        if bl > 0:
            lo = min(div_down(al, bl), div_down(al, bu))
            hi = max(div_up(au, bl), div_up(au, bu))
        else:
            lo = min(div_down(au, bl), div_down(au, bu))
            hi = max(div_up(al, bl), div_up(al, bu))
        return _mk(lo, hi)

    def __rtruediv__(self, other) -> "Bounds":
        other = _coerce_or_none(other)
        if other is None:
            return NotImplemented
        return other / self

    def __pow__(self, k: int) -> "Bounds":
        return self.pow(k)

    def sqr(self) -> "Bounds":
        lo, hi = self.lower, self.upper
        if lo >= 0:
            return _mk(mul_down(lo, lo), mul_up(hi, hi))
        if hi <= 0:
            return _mk(mul_down(hi, hi), mul_up(lo, lo))
        m = max(-lo, hi)
        return _mk(0.0, mul_up(m, m))

    def pow(self, k: int) -> "Bounds":
        if not isinstance(k, int):
            raise TypeError("only integer powers are supported")
        if k < 0:
            return self.pow(-k).rec()
        if k == 0:
            return _mk(1.0, 1.0)
        if k % 2 == 0:
            base = self.sqr()
            return base.pow(k // 2) if k > 2 else base
        result = self
        base = self
        k -= 1
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def rec(self) -> "Bounds":
        return _mk(1.0, 1.0) / self

    def hlf(self) -> "Bounds":
        return _mk(div_down(self.lower, 2.0), div_up(self.upper, 2.0))

    def abs(self) -> "Bounds":
        if self.lower >= 0:
            return self
        if self.upper <= 0:
            return -self
        return _mk(0.0, max(-self.lower, self.upper))

    __abs__ = abs

    def max(self, other) -> "Bounds":
        other = coerce_bounds(other)
        return _mk(max(self.lower, other.lower), max(self.upper, other.upper))

    def min(self, other) -> "Bounds":
        other = coerce_bounds(other)
        return _mk(min(self.lower, other.lower), min(self.upper, other.upper))

    def fma(self, y, z) -> "Bounds":
        return self * coerce_bounds(y) + coerce_bounds(z)

    def sqrt(self) -> "Bounds":
        if self.lower < 0:
            raise DomainError(f"sqrt of {self}")
        return _mk(sqrt_down(self.lower), sqrt_up(self.upper))

    def exp(self) -> "Bounds":
        lo = 0.0 if self.lower == -INF else _exp_point(self.lower).lower
        hi = INF if self.upper == INF else _exp_point(self.upper).upper
        return _mk(lo, hi)

    def log(self) -> "Bounds":
        if self.lower <= 0:
            raise DomainError(f"log of {self}")
        lo = _log_point(self.lower).lower
        hi = INF if self.upper == INF else _log_point(self.upper).upper
        return _mk(lo, hi)

    def sin(self) -> "Bounds":
        return _trig_range(self, _sin_point, PI.hlf(), -PI.hlf())

    def cos(self) -> "Bounds":
        return _trig_range(self, _cos_point, _mk(0.0, 0.0), PI)

    def tan(self) -> "Bounds":
        lo, hi = self.lower, self.upper
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise DomainError("tan of an unbounded interval")
        # Poles at pi/2 + j*pi; reject the interval if any could lie inside.
        j0 = math.floor((lo - math.pi / 2) / math.pi) - 1
        j1 = math.ceil((hi - math.pi / 2) / math.pi) + 1
        half_pi = PI.hlf()
        for j in range(j0, j1 + 1):
            pole = half_pi + PI * j
            if pole.upper >= lo and pole.lower <= hi:
                raise DomainError(f"tan of {self} which may contain a pole")
        return _mk(_tan_point(lo).lower, _tan_point(hi).upper)

    def atan(self) -> "Bounds":
        lo = -PI.hlf().upper if self.lower == -INF else _atan_point(self.lower).lower
        hi = PI.hlf().upper if self.upper == INF else _atan_point(self.upper).upper
        return _mk(lo, hi)

    # -- text -------------------------------------------------------------------
    def __repr__(self) -> str:
        return f"Bounds({self.lower!r}, {self.upper!r})"

    def __str__(self) -> str:
        return format_bounds(self)


def _endpoint_down(x) -> float:
    if isinstance(x, float):
        return check_float(x)
    if isinstance(x, Bounds):
        return x.lower
    if isinstance(x, int):
        f = float(x)
        return f if int(f) == x else rational_down(Fraction(x))
    if isinstance(x, Fraction):
        return rational_down(x)
    raise TypeError(f"cannot convert {type(x).__name__} to an endpoint")


def _endpoint_up(x) -> float:
    if isinstance(x, float):
        return check_float(x)
    if isinstance(x, Bounds):
        return x.upper
    if isinstance(x, int):
        f = float(x)
        return f if int(f) == x else rational_up(Fraction(x))
    if isinstance(x, Fraction):
        return rational_up(x)
    raise TypeError(f"cannot convert {type(x).__name__} to an endpoint")


def _coerce_or_none(x) -> Bounds | None:
    if isinstance(x, Bounds):
        return x
    if isinstance(x, float):
        check_float(x)
        return _mk(x, x)
    if isinstance(x, (int, Fraction)):
        return _mk(_endpoint_down(x), _endpoint_up(x))
    return None


def coerce_bounds(x) -> Bounds:
    b = _coerce_or_none(x)
    if b is None:
        raise TypeError(f"cannot convert {type(x).__name__} to Bounds")
    return b


# ---------------------------------------------------------------------------
# Constants, computed from rational series with explicit remainders
# ---------------------------------------------------------------------------


def _ln2_rational() -> tuple[Fraction, Fraction]:
    terms = 80
    s = sum(Fraction(1, k * 2**k) for k in range(1, terms + 1))
    remainder = Fraction(1, (terms + 1) * 2**terms)
    return s, s + remainder


def _atan_inverse_rational(m: int, terms: int) -> tuple[Fraction, Fraction]:
    x = Fraction(1, m)
    s = sum(Fraction((-1) ** k) * x ** (2 * k + 1) / (2 * k + 1) for k in range(terms))
    r = x ** (2 * terms + 1) / (2 * terms + 1)
    return s - r, s + r


def _pi_rational() -> tuple[Fraction, Fraction]:
    a_lo, a_hi = _atan_inverse_rational(5, 30)
    b_lo, b_hi = _atan_inverse_rational(239, 12)
    return 16 * a_lo - 4 * b_hi, 16 * a_hi - 4 * b_lo


_ln2_lo, _ln2_hi = _ln2_rational()
LN2 = _mk(rational_down(_ln2_lo), rational_up(_ln2_hi))
_pi_lo, _pi_hi = _pi_rational()
PI = _mk(rational_down(_pi_lo), rational_up(_pi_hi))
_ONE = _mk(1.0, 1.0)
_SQRT_HALF = 0.7071067811865476


def _exp_series(r: Bounds, terms: int = 24) -> Bounds:
    """exp(r) for |r| <= 1/2 via Horner plus a geometric tail bound."""
    s = _ONE
    for i in range(terms, 0, -1):
        s = _ONE + (r * s) / float(i)
    m = r.mag()
    # Tail sum_{i>terms} m^i/i! <= 2 m^(terms+1)/(terms+1)! for m <= 1.
    tail = _mk(m, m).pow(terms + 1) / float(math.factorial(terms + 1)) * 2.0
    return s + _mk(-tail.upper, tail.upper)


def _exp_point(x: float) -> Bounds:
    if x == 0:
        return _ONE
    if x > 710.0:
        return _mk(MAX_FLOAT, INF)
    if x < -746.0:
        return _mk(0.0, MIN_SUBNORMAL)
    k = int(round(x / LN2.mid()))
    r = _mk(x, x) - LN2 * float(k)
    s = _exp_series(r)
    return _mk(max(_ldexp_down(s.lower, k), 0.0), _ldexp_up(s.upper, k))


def _log_point(x: float) -> Bounds:
    if x == 1.0:
        return _mk(0.0, 0.0)
    if x == INF:
        return _mk(MAX_FLOAT, INF)
    m, e = math.frexp(x)
    if m < _SQRT_HALF:
        m *= 2.0
        e -= 1
    mb = _mk(m, m)
    u = (mb - 1.0) / (mb + 1.0)
    u2 = u.sqr()
    terms = 24
    s = _mk(0.0, 0.0)
    for k in range(terms - 1, -1, -1):
        s = _ONE / float(2 * k + 1) + u2 * s
    s = s * u
    um = u.mag()
    tail = _mk(um, um).pow(2 * terms + 1) / float(2 * terms + 1) / (_ONE - u2.upper)
    s = (s + _mk(-tail.upper, tail.upper)) * 2.0
    return LN2 * float(e) + s


def _reciprocal(n: int) -> Bounds:
    q = Fraction(1, n)
    return _mk(rational_down(q), rational_up(q))


# 1/((2k)(2k+1)) and 1/((2k-1)(2k)) for the sine and cosine recurrences
_SIN_FACTORS = [None] + [_reciprocal((2 * k) * (2 * k + 1)) for k in range(1, 15)]
_COS_FACTORS = [None] + [_reciprocal((2 * k - 1) * (2 * k)) for k in range(1, 15)]


def _sin_cos_terms(m: float) -> int:
    """Smallest term count (at most 14) whose series tail is below 2^-60 for |r| <= m."""
    for terms in range(4, 14):
        if m ** (2 * terms + 2) / math.factorial(2 * terms + 2) < 2.0**-60:
            return terms
    return 14


def _sin_cos_series(r: Bounds) -> tuple[Bounds, Bounds]:
    m = r.mag()
    terms = _sin_cos_terms(m)
    r2 = r.sqr()
    s = _ONE
    for k in range(terms, 0, -1):
        s = _ONE - r2 * s * _SIN_FACTORS[k]
    s = s * r
    c = _ONE
    for k in range(terms, 0, -1):
        c = _ONE - r2 * c * _COS_FACTORS[k]
    tail_s = _mk(m, m).pow(2 * terms + 3) / float(math.factorial(2 * terms + 3))
    tail_c = _mk(m, m).pow(2 * terms + 2) / float(math.factorial(2 * terms + 2))
    s = s + _mk(-tail_s.upper, tail_s.upper)
    c = c + _mk(-tail_c.upper, tail_c.upper)
    return s, c


_UNIT = _mk(-1.0, 1.0)


def _reduce_quarter(x: float) -> tuple[Bounds, int] | None:
    if abs(x) > 2.0**40:
        return None
    half_pi = PI.hlf()
    k = int(round(x / half_pi.mid()))
    r = _mk(x, x) - half_pi * float(k)
    return r, k % 4


def _clip_unit(b: Bounds) -> Bounds:
    return _mk(max(b.lower, -1.0), min(b.upper, 1.0))


@lru_cache(maxsize=4096)
def _sin_cos_point(x: float) -> tuple[Bounds, Bounds]:
    """Enclosures of (sin x, cos x); results are shared, so never mutate them."""
    if x == 0:
        return _mk(0.0, 0.0), _ONE
    red = _reduce_quarter(x)
    if red is None:
        return _UNIT, _UNIT
    r, q = red
    s, c = _sin_cos_series(r)
    return _clip_unit((s, c, -s, -c)[q]), _clip_unit((c, -s, -c, s)[q])


def _sin_point(x: float) -> Bounds:
    return _sin_cos_point(x)[0]


def _cos_point(x: float) -> Bounds:
    return _sin_cos_point(x)[1]


def _tan_point(x: float) -> Bounds:
    return _sin_point(x) / _cos_point(x)


def _atan_series(u: Bounds) -> Bounds:
    terms = 40
    u2 = u.sqr()
    s = _mk(0.0, 0.0)
    for k in range(terms - 1, -1, -1):
        s = _ONE / float(2 * k + 1) - u2 * s
    s = s * u
    m = u.mag()
    tail = _mk(m, m).pow(2 * terms + 1) / float(2 * terms + 1)
    return s + _mk(-tail.upper, tail.upper)


def _atan_point(x: float) -> Bounds:
    if x == 0:
        return _mk(0.0, 0.0)
    if x < 0:
        return -_atan_point(-x)
    if x == INF:
        return PI.hlf()
    xb = _mk(x, x)
    if x > 1.0:
        inner = _atan_small(_ONE / xb)
        return PI.hlf() - inner
    return _atan_small(xb)


def _atan_small(u: Bounds) -> Bounds:
    # For 0 <= u <= 1 reduce around pi/4 so the series argument is <= 0.4143.
    if u.upper > 0.41421356:
        v = (u - 1.0) / (u + 1.0)
        return PI / 4.0 + _atan_series(v)
    return _atan_series(u)


def _trig_range(x: Bounds, point_fn, max_phase: Bounds, min_phase: Bounds) -> Bounds:
    """Range of a 2*pi-periodic function given its max/min phases."""
    lo, hi = x.lower, x.upper
    if not (math.isfinite(lo) and math.isfinite(hi)):
        return _UNIT
    if hi - lo >= 6.3:
        return _UNIT
    if lo == hi:
        return point_fn(lo)
    a, b = point_fn(lo), point_fn(hi)
    result_lo = min(a.lower, b.lower)
    result_hi = max(a.upper, b.upper)
    two_pi = PI * 2.0
    j0 = math.floor(lo / (2 * math.pi)) - 2
    j1 = math.ceil(hi / (2 * math.pi)) + 2
    for j in range(j0, j1 + 1):
        p = max_phase + two_pi * float(j)
        if p.upper >= lo and p.lower <= hi:
            result_hi = 1.0
        p = min_phase + two_pi * float(j)
        if p.upper >= lo and p.lower <= hi:
            result_lo = -1.0
    return _mk(max(result_lo, -1.0), min(result_hi, 1.0))


# ---------------------------------------------------------------------------
# Balls
# ---------------------------------------------------------------------------


class Ball:
    """Centre-radius enclosure ``centre +/- radius``."""

    __slots__ = ("centre", "radius")

    def __init__(self, centre: float, radius: float = 0.0):
        self.centre = check_float(centre)
        radius = check_float(radius)
        if radius < 0:
            raise ValueError("ball radius must be nonnegative")
        self.radius = radius

    @classmethod
    def from_bounds(cls, b: Bounds) -> "Ball":
        return cls(b.mid(), b.rad())

    def to_bounds(self) -> Bounds:
        return Bounds.centred(self.centre, self.radius)

    def contains(self, x: Real) -> bool:
        return self.to_bounds().contains(x)

    __contains__ = contains

    def __repr__(self) -> str:
        return f"Ball({self.centre!r}, {self.radius!r})"

    def __str__(self) -> str:
        return f"{self.centre!r}+/-{self.radius!r}"


# ---------------------------------------------------------------------------
# Text rendering
# ---------------------------------------------------------------------------


def format_bounds(b: Bounds) -> str:
    return f"[{b.lower!r}:{b.upper!r}]"


def _decimal_string(n: int, places: int) -> str:
    sign = "-" if n < 0 else ""
    digits = str(abs(n)).rjust(places + 1, "0")
    if places == 0:
        return sign + digits
    return f"{sign}{digits[:-places]}.{digits[-places:]}"


def format_bounds_compact(b: Bounds, significant: int = 15) -> str:
    """Common-prefix rendering such as ``1.2247448713915[9:8]``.

    The digits inside the brackets replace the tail of the shared prefix
    (lower endpoint first).  When the endpoints share no usable prefix the
    form ``base[-lo:+hi]`` is used, with signed offsets counting units of
    the last printed digit.  Wide intervals fall back to ``[lo:hi]``.
    Every form encloses the interval.
    """
    lo, hi = b.lower, b.upper
    if not (math.isfinite(lo) and math.isfinite(hi)):
        return format_bounds(b)
    mag = max(abs(lo), abs(hi))
    if mag == 0:
        return "0.0"
    places = significant - 1 - math.floor(math.log10(mag))
    width = hi - lo
    if width > 0:
        places = min(places, math.floor(-math.log10(width)) + 2)
    if places < 1:
        return format_bounds(b)
    scale = Fraction(10) ** places
    low = math.floor(Fraction(lo) * scale)
    high = math.ceil(Fraction(hi) * scale)
    if low == high:
        return _decimal_string(low, places)
    if (low >= 0) == (high >= 0) and low != 0 and high != 0:
        neg = low < 0
        s_lo = str(abs(low)).rjust(places + 1, "0")
        s_hi = str(abs(high)).rjust(places + 1, "0")
        if len(s_lo) == len(s_hi):
            common = 0
            while common < len(s_lo) and s_lo[common] == s_hi[common]:
                common += 1
            tail = len(s_lo) - common
            if 0 < tail <= min(places, 3) and common > 0:
                prefix = _decimal_string(int(s_lo[:common] + "0" * tail), places)
                prefix = prefix[: len(prefix) - tail]
                if neg:
                    prefix = "-" + prefix
                return f"{prefix}[{s_lo[common:]}:{s_hi[common:]}]"
    if width > 1e-6 * max(mag, 1.0):
        return format_bounds(b)
    base = 0 if low < 0 < high else (low + high) // 2
    return f"{_decimal_string(base, places)}[{low - base:+d}:{high - base:+d}]"


def parse_bounds_text(text: str) -> Bounds:
    """Inverse of :func:`format_bounds` / :func:`format_bounds_compact`.

    The result encloses the set denoted by the text.
    """
    text = text.strip()
    if text.startswith("[") and text.endswith("]"):
        lo_s, hi_s = text[1:-1].split(":")
        return Bounds(Fraction(lo_s.strip()), Fraction(hi_s.strip()))
    if "[" not in text:
        q = Fraction(text)
        return Bounds(q, q)
    head, rest = text.split("[", 1)
    lo_s, hi_s = rest.rstrip("]").split(":")
    if lo_s[:1] in "+-" or hi_s[:1] in "+-":
        places = len(head.split(".")[1]) if "." in head else 0
        base = Fraction(head)
        unit = Fraction(1, 10**places)
        return Bounds(base + int(lo_s) * unit, base + int(hi_s) * unit)
    neg = head.startswith("-")
    body = head[1:] if neg else head
    lo_q, hi_q = Fraction(body + lo_s), Fraction(body + hi_s)
    if neg:
        lo_q, hi_q = -lo_q, -hi_q
    return Bounds(min(lo_q, hi_q), max(lo_q, hi_q))

"""Taylor models over the unit box [-1,+1]^n.

A :class:`UnitTaylorModel` is a sparse polynomial p with float coefficients
together with a uniform error bound e; it represents every function f on
the unit box with sup |f - p| <= e.  Every operation returns a model that
represents all results of applying the exact operation to represented
inputs, with floating-point rounding errors swept into e.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .algebra import taylor_coefficients
from .errors import DomainError, ShapeError
from .multiindex import format_monomial, graded_revlex_key
from .numerics import (
    INF,
    Bounds,
    add_up,
    coerce_bounds,
    div_up,
    mul_up,
    op_error_bound,
    sub_down,
    sub_up,
    sum_up,
    ulp,
)
from .numerics import _SPLIT, _two_prod_err, _two_sum_err
from operator import add as _add

_SAFE_LO = 2.0**-960
_SAFE_HI = 2.0**960

# "bracket" uses the directed-rounding bracket of each operation; "half_ulp"
# uses the coarser half-ulp bound of the rounded result.
ERROR_MODE = "bracket"


def set_error_mode(mode: str) -> None:
    global ERROR_MODE
    if mode not in ("bracket", "half_ulp"):
        raise ValueError(f"unknown error mode {mode!r}")
    ERROR_MODE = mode


def _half_gap(s: float, err: float) -> float:
    if err == 0:
        return 0.0
    if ERROR_MODE == "half_ulp":
        return ulp(s) * 0.5
    return abs(math.nextafter(s, math.copysign(INF, err)) - s) * 0.5


def add_error(a: float, b: float, s: float) -> float:
    """op_error_bound(a, 'add', b) for the already computed sum ``s``."""
    if _SAFE_LO < abs(s) < _SAFE_HI and abs(a) < _SAFE_HI and abs(b) < _SAFE_HI:
        return _half_gap(s, _two_sum_err(a, b, s))
    if s == 0 and a == -b:
        return 0.0
    return op_error_bound(a, "add", b)


def mul_error(a: float, b: float, p: float) -> float:
    """op_error_bound(a, 'mul', b) for the already computed product ``p``."""
    if a == 0 or b == 0:
        return 0.0
    if _SAFE_LO < abs(p) < _SAFE_HI and abs(a) < 2.0**500 and abs(b) < 2.0**500:
        return _half_gap(p, _two_prod_err(a, b, p))
    return op_error_bound(a, "mul", b)


def _multiply_coefficients(A: dict, B: dict) -> tuple[dict, float]:
    """Product of sparse polynomials and an upper bound on its rounding error.

    The bound is the upward sum of op_error_bound over every product and
    accumulation.  In the common safe exponent range each bound is half the
    gap to the neighbouring float on the side of the exact error, found with
    error-free transforms; these halves are summed exactly at the end.
    """
    if not A or not B:
        return {}, 0.0
    amax = max(map(abs, A.values()))
    bmax = max(map(abs, B.values()))
    if ERROR_MODE != "bracket" or not (amax < 2.0**400 and bmax < 2.0**400):
        return _multiply_coefficients_slow(A, B)
    out: dict = {}
    gaps: list[float] = []
    push = gaps.append
    slow_err = 0.0
    nextafter = math.nextafter
    split = _SPLIT
    lo = _SAFE_LO
    b_items = [(b, cb, split * cb) for b, cb in B.items()]
    b_items = [(b, cb, t - (t - cb)) for b, cb, t in b_items]
    b_items = [(b, cb, bh, cb - bh) for b, cb, bh in b_items]
    get = out.get
    for a, ca in A.items():
        t = split * ca
        ah = t - (t - ca)
        al = ca - ah
        for b, cb, bh, bl in b_items:
            key = tuple(map(_add, a, b))
            p = ca * cb
            if abs(p) > lo:
                e = ((ah * bh - p) + ah * bl + al * bh) + al * bl
                if e:
                    push(abs(nextafter(p, INF if e > 0 else -INF) - p))
            else:
                slow_err = add_up(slow_err, mul_error(ca, cb, p))
            x = get(key)
            if x is None:
                out[key] = p
            else:
                sm = x + p
                if abs(sm) > lo:
                    bb = sm - x
                    e = (x - (sm - bb)) + (p - bb)
                    if e:
                        push(abs(nextafter(sm, INF if e > 0 else -INF) - sm))
                elif not (sm == 0 and x == -p):
                    slow_err = add_up(slow_err, add_error(x, p, sm))
                out[key] = sm
    err = slow_err
    if gaps:
        total = math.fsum(gaps)
        err = add_up(err, nextafter(total * 0.5, INF) if total else 0.0)
    return out, err


def _multiply_coefficients_slow(A: dict, B: dict) -> tuple[dict, float]:
    out: dict = {}
    err = 0.0
    b_items = list(B.items())
    for a, ca in A.items():
        for b, cb in b_items:
            key = tuple(x + y for x, y in zip(a, b))
            p = ca * cb
            e = mul_error(ca, cb, p)
            if e:
                err = add_up(err, e)
            x = out.get(key)
            if x is None:
                out[key] = p
            else:
                sm = x + p
                e = add_error(x, p, sm)
                if e:
                    err = add_up(err, e)
                out[key] = sm
    return out, err


# ---------------------------------------------------------------------------
# Sweepers
# ---------------------------------------------------------------------------

DEFAULT_THRESHOLD = 2.0**-36


@dataclass(frozen=True)
class Sweeper:
    """Policy selecting polynomial terms to move into the error bound.

    Attributes:
        kind: ``"threshold"`` drops terms with |c| below ``threshold``;
            ``"graded"`` drops terms of degree above ``max_degree``;
            ``"null"`` keeps everything.
    """

    kind: str = "threshold"
    threshold: float = DEFAULT_THRESHOLD
    max_degree: int = 0

    def __post_init__(self):
        if self.kind not in ("threshold", "graded", "null"):
            raise ValueError(f"unknown sweeper kind {self.kind!r}")
        if not self.threshold >= 0:
            raise ValueError("sweeper threshold must be nonnegative")

    def discards(self, alpha: tuple[int, ...], c: float) -> bool:
        if self.kind == "threshold":
            return abs(c) < self.threshold
        if self.kind == "graded":
            return sum(alpha) > self.max_degree
        return False

    @property
    def target_accuracy(self) -> float:
        """Accuracy aimed at by series truncations made under this policy."""
        if self.kind == "threshold" and self.threshold > 0:
            return self.threshold
        return 2.0**-52


def threshold_sweeper(threshold: float = DEFAULT_THRESHOLD) -> Sweeper:
    return Sweeper("threshold", threshold)


def graded_sweeper(max_degree: int) -> Sweeper:
    return Sweeper("graded", 0.0, max_degree)


NULL_SWEEPER = Sweeper("null", 0.0)
DEFAULT_SWEEPER = Sweeper()


# ---------------------------------------------------------------------------
# Multivariate Horner evaluation, shared by scalar and model arguments
# ---------------------------------------------------------------------------


def horner(coefficients: dict, args: Sequence, const: Callable):
    """Evaluate sum c_alpha z^alpha by nested Horner in the algebra of ``args``.

    ``const(c)`` lifts a float coefficient into that algebra.  The last
    variable forms the outermost Horner loop.
    """
    items = list(coefficients.items())
    if not items:
        return const(0.0)
    return _horner(items, args, len(args) - 1, const)


def _horner(items, args, i, const):
    if i < 0:
        return const(items[0][1])
    groups: dict[int, list] = {}
    for alpha, c in items:
        groups.setdefault(alpha[i], []).append((alpha, c))
    result = None
    for k in range(max(groups), -1, -1):
        sub = groups.get(k)
        val = _horner(sub, args, i - 1, const) if sub else None
        if result is None:
            result = val
        else:
            result = result * args[i]
            if val is not None:
                result = result + val
    return result


# ---------------------------------------------------------------------------
# Unit Taylor models
# ---------------------------------------------------------------------------


class UnitTaylorModel:
    """Polynomial over [-1,+1]^n plus uniform error bound.

    Args:
        argument_count: number of variables n.
        coefficients: mapping from exponent tuples to float coefficients.
        error: nonnegative uniform error bound.
        sweeper: policy applied after multiplication, composition and
            analytic functions (the left operand's policy wins).
    """

    __slots__ = ("argument_count", "coefficients", "error", "sweeper")

    def __init__(self, argument_count: int, coefficients=None, error: float = 0.0,
                 sweeper: Sweeper = DEFAULT_SWEEPER):
        self.argument_count = argument_count
        self.coefficients: dict[tuple[int, ...], float] = {}
        self.error = float(error)
        if not self.error >= 0:
            raise ValueError("error bound must be nonnegative")
        self.sweeper = sweeper
        for alpha, c in dict(coefficients or {}).items():
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != argument_count:
                raise ShapeError("multi-index length differs from argument count")
            c = float(c)
            if c != c:
                raise ValueError("NaN coefficient")
            if c != 0:
                self.coefficients[alpha] = c

    @classmethod
    def _raw(cls, n, coeffs, error, sweeper) -> "UnitTaylorModel":
        out = object.__new__(cls)
        out.argument_count = n
        out.coefficients = coeffs
        out.error = error
        out.sweeper = sweeper
        return out

    # -- construction ---------------------------------------------------------
    @classmethod
    def constant(cls, n: int, value, sweeper: Sweeper = DEFAULT_SWEEPER) -> "UnitTaylorModel":
        b = coerce_bounds(value)
        if not (math.isfinite(b.lower) and math.isfinite(b.upper)):
            raise DomainError(f"constant {b} is not finite")
        m = b.mid()
        coeffs = {(0,) * n: m} if m != 0 else {}
        return cls._raw(n, coeffs, b.rad(), sweeper)

    @classmethod
    def variable(cls, n: int, j: int, sweeper: Sweeper = DEFAULT_SWEEPER) -> "UnitTaylorModel":
        if not 0 <= j < n:
            raise IndexError(f"variable {j} out of range for {n} arguments")
        return cls._raw(n, {tuple(1 if i == j else 0 for i in range(n)): 1.0}, 0.0, sweeper)

    @classmethod
    def zero(cls, n: int, sweeper: Sweeper = DEFAULT_SWEEPER) -> "UnitTaylorModel":
        return cls._raw(n, {}, 0.0, sweeper)

    def create_constant(self, value) -> "UnitTaylorModel":
        return UnitTaylorModel.constant(self.argument_count, value, self.sweeper)

    def create_zero(self) -> "UnitTaylorModel":
        return UnitTaylorModel.zero(self.argument_count, self.sweeper)

    def with_sweeper(self, sweeper: Sweeper) -> "UnitTaylorModel":
        return UnitTaylorModel._raw(self.argument_count, dict(self.coefficients), self.error, sweeper)

    def copy(self) -> "UnitTaylorModel":
        return self.with_sweeper(self.sweeper)

    # -- queries ---------------------------------------------------------------
    @property
    def terms(self) -> list[tuple[tuple[int, ...], float]]:
        """(alpha, c) pairs strictly sorted in graded reverse-lex order."""
        return [(a, self.coefficients[a]) for a in sorted(self.coefficients, key=graded_revlex_key)]

    @property
    def constant_term(self) -> float:
        return self.coefficients.get((0,) * self.argument_count, 0.0)

    @property
    def degree(self) -> int:
        return max((sum(a) for a in self.coefficients), default=0)

    def __len__(self) -> int:
        return len(self.coefficients)

    def norm(self) -> float:
        """Upper bound on the sup-norm over the unit box."""
        return add_up(sum_up(abs(c) for c in self.coefficients.values()), self.error)

    def polynomial_norm(self) -> float:
        return sum_up(abs(c) for c in self.coefficients.values())

    def range(self) -> Bounds:
        """Enclosure of the range over the unit box.

        Odd monomials range over [-1, 1]; monomials with all exponents even
        range over [0, 1], so their coefficient only widens one side.
        """
        zero = (0,) * self.argument_count
        c0 = self.coefficients.get(zero, 0.0)
        r = self.error
        below = above = 0.0
        for a, c in self.coefficients.items():
            if a == zero:
                continue
            if all(k % 2 == 0 for k in a):
                if c > 0:
                    above = add_up(above, c)
                else:
                    below = add_up(below, -c)
            else:
                r = add_up(r, abs(c))
        if below == above == 0.0:
            return Bounds.centred(c0, r)
        return Bounds(sub_down(c0, add_up(r, below)), add_up(c0, add_up(r, above)))

    def refines(self, other: "UnitTaylorModel", strict: bool = False) -> bool:
        """Sufficient test that every function represented here is represented by ``other``.

        With ``strict`` the enclosure must lie in the interior of ``other``
        at every point of the domain.
        """
        self._check(other)
        total = self.error
        for a in set(self.coefficients) | set(other.coefficients):
            x = self.coefficients.get(a, 0.0)
            y = other.coefficients.get(a, 0.0)
            total = add_up(total, max(sub_up(x, y), sub_up(y, x)))
        return total < other.error if strict else total <= other.error

    def _check(self, other: "UnitTaylorModel") -> None:
        if other.argument_count != self.argument_count:
            raise ShapeError(
                f"argument counts differ: {self.argument_count} vs {other.argument_count}")

    # -- sweeping ----------------------------------------------------------------
    def sweep(self, sweeper: Sweeper | None = None) -> "UnitTaylorModel":
        sweeper = sweeper or self.sweeper
        if sweeper.kind == "null":
            return self
        keep = {}
        err = self.error
        for a, c in self.coefficients.items():
            if sweeper.discards(a, c):
                err = add_up(err, abs(c))
            else:
                keep[a] = c
        return UnitTaylorModel._raw(self.argument_count, keep, err, self.sweeper)

    # -- arithmetic ----------------------------------------------------------------
    def _lift(self, other) -> "UnitTaylorModel | None":
        if isinstance(other, UnitTaylorModel):
            self._check(other)
            return other
        if isinstance(other, (int, float, Fraction, Bounds)):
            return self.create_constant(other)
        return None

    def __pos__(self) -> "UnitTaylorModel":
        return self

    def __neg__(self) -> "UnitTaylorModel":
        return UnitTaylorModel._raw(self.argument_count,
                                    {a: -c for a, c in self.coefficients.items()},
                                    self.error, self.sweeper)

    def __add__(self, other) -> "UnitTaylorModel":
        other = self._lift(other)
        if other is None:
            return NotImplemented
        out = dict(self.coefficients)
        err = add_up(self.error, other.error)
        for a, c in other.coefficients.items():
            x = out.get(a)
            if x is None:
                out[a] = c
                continue
            s = x + c
            err = add_up(err, add_error(x, c, s))
            if s == 0:
                del out[a]
            else:
                out[a] = s
        return UnitTaylorModel._raw(self.argument_count, out, err, self.sweeper)

    def __radd__(self, other) -> "UnitTaylorModel":
        return self.__add__(other)

    def __sub__(self, other) -> "UnitTaylorModel":
        other = self._lift(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "UnitTaylorModel":
        other = self._lift(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def scale(self, s) -> "UnitTaylorModel":
        """Multiply by a scalar (enclosed by Bounds), no sweeping."""
        b = coerce_bounds(s)
        m = b.mid()
        r = b.rad()
        out = {}
        err = mul_up(self.error, b.mag())
        if r > 0:
            err = add_up(err, mul_up(r, self.polynomial_norm()))
        if m != 0:
            for a, c in self.coefficients.items():
                p = c * m
                err = add_up(err, mul_error(c, m, p))
                if p != 0:
                    out[a] = p
        if not math.isfinite(err):
            raise DomainError("Taylor model error bound overflowed")
        return UnitTaylorModel._raw(self.argument_count, out, err, self.sweeper)

    def __mul__(self, other) -> "UnitTaylorModel":
        if isinstance(other, (int, float, Fraction, Bounds)):
            return self.scale(other)
        if not isinstance(other, UnitTaylorModel):
            return NotImplemented
        self._check(other)
        out, err = _multiply_coefficients(self.coefficients, other.coefficients)
        out = {k: v for k, v in out.items() if v != 0}
        n1 = self.polynomial_norm()
        n2 = other.polynomial_norm()
        e1, e2 = self.error, other.error
        if e1 or e2:
            err = add_up(err, mul_up(n1, e2))
            err = add_up(err, mul_up(n2, e1))
            err = add_up(err, mul_up(e1, e2))
        if not math.isfinite(err):
            raise DomainError("Taylor model error bound overflowed")
        return UnitTaylorModel._raw(self.argument_count, out, err, self.sweeper).sweep()

    def __rmul__(self, other) -> "UnitTaylorModel":
        return self.__mul__(other)

    def __truediv__(self, other) -> "UnitTaylorModel":
        if isinstance(other, (int, float, Fraction, Bounds)):
            return self.scale(Bounds(1.0) / coerce_bounds(other))
        if isinstance(other, UnitTaylorModel):
            return self * other.rec()
        return NotImplemented

    def __rtruediv__(self, other) -> "UnitTaylorModel":
        return self.rec().scale(other)

    def pow(self, k: int) -> "UnitTaylorModel":
        if k < 0:
            return self.pow(-k).rec()
        result = self.create_constant(1.0)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    __pow__ = pow

    def sqr(self) -> "UnitTaylorModel":
        return self * self

    def hlf(self) -> "UnitTaylorModel":
        return self.scale(0.5)

    # -- evaluation and composition ----------------------------------------------
    def evaluate(self, z: Sequence) -> Bounds:
        """Enclosure of f(z) for every represented f and point z in the box ``z``."""
        if len(z) != self.argument_count:
            raise ShapeError("argument count mismatch in evaluation")
        zb = [coerce_bounds(v) for v in z]
        for v in zb:
            if v.lower < -1.0 or v.upper > 1.0:
                raise DomainError(f"evaluation point {v} outside the unit domain")
        p = horner(self.coefficients, zb, lambda c: Bounds(c))
        return p + Bounds(-self.error, self.error)

    def compose(self, inner: Sequence["UnitTaylorModel"], check: bool = True) -> "UnitTaylorModel":
        """Substitute models (already in unit coordinates) for each variable."""
        inner = list(inner)
        if len(inner) != self.argument_count:
            raise ShapeError("composition needs one inner model per outer variable")
        if not inner:
            raise ShapeError("cannot compose a model with no arguments")
        if check:
            for g in inner:
                r = g.range()
                if r.lower < -1.0 or r.upper > 1.0:
                    raise DomainError(f"inner range {r} escapes the unit domain")
        proto = inner[0]
        result = horner(self.coefficients, inner, proto.create_constant)
        result = result.with_sweeper(self.sweeper)
        return UnitTaylorModel._raw(result.argument_count, result.coefficients,
                                    add_up(result.error, self.error), self.sweeper).sweep()

    def partial_evaluate(self, j: int, value) -> "UnitTaylorModel":
        """Fix z_j to ``value`` (in [-1,1]); the argument count is kept."""
        v = coerce_bounds(value)
        if v.lower < -1.0 or v.upper > 1.0:
            raise DomainError(f"value {v} outside the unit domain")
        acc: dict[tuple, Bounds] = {}
        powers = [Bounds(1.0)]
        for a, c in self.coefficients.items():
            k = a[j]
            while len(powers) <= k:
                powers.append(powers[-1] * v)
            key = a[:j] + (0,) + a[j + 1:]
            t = powers[k] * c
            acc[key] = acc[key] + t if key in acc else t
        return _from_bounds_coefficients(self.argument_count, acc, self.error, self.sweeper)

    def antidifferentiate(self, j: int, radius=1.0) -> "UnitTaylorModel":
        """Antiderivative in z_j scaled by the domain radius, vanishing at z_j = 0."""
        if not 0 <= j < self.argument_count:
            raise IndexError(f"variable {j} out of range")
        r = coerce_bounds(radius)
        acc = {}
        for a, c in self.coefficients.items():
            key = a[:j] + (a[j] + 1,) + a[j + 1:]
            acc[key] = r * c / (a[j] + 1)
        return _from_bounds_coefficients(self.argument_count, acc,
                                         mul_up(self.error, r.mag()), self.sweeper)

    def derivative_of_midpoint(self, j: int, radius=1.0) -> "UnitTaylorModel":
        """Derivative in z_j of the polynomial part divided by the domain radius.

        The input's error bound is discarded, so the result describes the
        derivative of the midpoint polynomial only.
        """
        r = coerce_bounds(radius)
        acc = {}
        for a, c in self.coefficients.items():
            if a[j] == 0:
                continue
            key = a[:j] + (a[j] - 1,) + a[j + 1:]
            acc[key] = Bounds(c) * a[j] / r
        return _from_bounds_coefficients(self.argument_count, acc, 0.0, self.sweeper)

    def split_restrict(self, j: int, half: str) -> "UnitTaylorModel":
        """Precompose with the map sending [-1,+1] to the lower or upper half in z_j."""
        if half not in ("lower", "upper"):
            raise ValueError("half must be 'lower' or 'upper'")
        n = self.argument_count
        shift = -0.5 if half == "lower" else 0.5
        inner = []
        for i in range(n):
            v = UnitTaylorModel.variable(n, i, NULL_SWEEPER)
            if i == j:
                v = UnitTaylorModel._raw(n, {tuple(1 if k == j else 0 for k in range(n)): 0.5,
                                             (0,) * n: shift}, 0.0, NULL_SWEEPER)
            inner.append(v)
        out = self.with_sweeper(NULL_SWEEPER).compose(inner, check=False)
        return out.with_sweeper(self.sweeper)

    def restrict_affine(self, j: int, scale: float, shift: float) -> "UnitTaylorModel":
        """Precompose with z_j -> scale*z_j + shift (requires |scale|+|shift| <= 1)."""
        if add_up(abs(scale), abs(shift)) > 1.0:
            raise DomainError("affine restriction leaves the unit domain")
        n = self.argument_count
        inner = []
        for i in range(n):
            if i == j:
                c = {tuple(1 if k == j else 0 for k in range(n)): float(scale)}
                if shift:
                    c[(0,) * n] = float(shift)
                inner.append(UnitTaylorModel._raw(n, c, 0.0, NULL_SWEEPER))
            else:
                inner.append(UnitTaylorModel.variable(n, i, NULL_SWEEPER))
        return self.with_sweeper(NULL_SWEEPER).compose(inner, check=False).with_sweeper(self.sweeper)

    def embed(self, n_total: int, positions: Sequence[int]) -> "UnitTaylorModel":
        """Re-index into ``n_total`` variables; variable i moves to ``positions[i]``."""
        out = {}
        for a, c in self.coefficients.items():
            key = [0] * n_total
            for i, e in enumerate(a):
                key[positions[i]] += e
            out[tuple(key)] = c
        return UnitTaylorModel._raw(n_total, out, self.error, self.sweeper)

    # -- analytic functions -------------------------------------------------------
    def exp(self) -> "UnitTaylorModel":
        """Exponential by scaling-and-squaring in the Banach algebra of models."""
        n = self.argument_count
        zero = (0,) * n
        c = self.coefficients.get(zero, 0.0)
        y = UnitTaylorModel._raw(n, {a: v for a, v in self.coefficients.items() if a != zero},
                                 self.error, self.sweeper)
        ny = y.norm()
        if not math.isfinite(ny):
            raise DomainError("exp of an unbounded model")
        k = 0
        if ny > 0.5:
            k = max(0, math.ceil(math.log2(ny)) + 1)
            while math.ldexp(ny, -k) > 0.5:
                k += 1
        z = y.scale(math.ldexp(1.0, -k)) if k else y
        nz = z.norm()
        target = self.sweeper.target_accuracy
        order = 1
        tail = 2.0 * nz
        while order < 30:
            # sum_{i >= N} |z|^i / i! <= 2 |z|^N / N! when |z| <= 1/2
            tail = (Bounds(nz).pow(order) * 2.0 / math.factorial(order)).upper
            if tail <= target * 0.25 or tail == 0:
                break
            order += 1
        s = self.create_constant(1.0)
        for i in range(order - 1, 0, -1):
            s = (z * s).scale(Bounds(1.0) / i) + 1.0
        s = UnitTaylorModel._raw(n, s.coefficients, add_up(s.error, tail), self.sweeper)
        for _ in range(k):
            s = s * s
        return (s * Bounds(c).exp()).sweep()

    def _series_function(self, name: str, order_cap: int = 24) -> "UnitTaylorModel":
        n = self.argument_count
        zero = (0,) * n
        R = self.range()
        if not (math.isfinite(R.lower) and math.isfinite(R.upper)):
            raise DomainError(f"{name} of an unbounded model")
        _check_domain(name, R)
        c = self.coefficients.get(zero, 0.0)
        y = UnitTaylorModel._raw(n, {a: v for a, v in self.coefficients.items() if a != zero},
                                 self.error, self.sweeper)
        ny = y.norm()
        target = self.sweeper.target_accuracy
        if ny == 0:
            return self.create_constant(getattr(Bounds(c), name)())
        remainder_coeffs = taylor_coefficients(name, R, order_cap)
        chosen = order_cap
        remainder = INF
        nyb = Bounds(ny)
        for N in range(1, order_cap + 1):
            rem = (nyb.pow(N) * remainder_coeffs[N].mag()).upper
            if rem < remainder:
                remainder, chosen = rem, N
            if rem <= target * 0.25:
                break
        if not math.isfinite(remainder):
            raise DomainError(f"{name} remainder is unbounded on {R}")
        centre_coeffs = taylor_coefficients(name, Bounds(c), chosen)
        result = self.create_constant(centre_coeffs[chosen - 1])
        for i in range(chosen - 2, -1, -1):
            result = result * y + centre_coeffs[i]
        result = UnitTaylorModel._raw(n, result.coefficients, add_up(result.error, remainder),
                                      self.sweeper)
        return result.sweep()

    def log(self) -> "UnitTaylorModel":
        return self._series_function("log")

    def sin(self) -> "UnitTaylorModel":
        return self._series_function("sin")

    def cos(self) -> "UnitTaylorModel":
        return self._series_function("cos")

    def tan(self) -> "UnitTaylorModel":
        # Interval enclosures of high tan derivatives are poor; go via sin/cos.
        return self.sin() * self.cos().rec()

    def atan(self) -> "UnitTaylorModel":
        return self._series_function("atan")

    def sqrt(self) -> "UnitTaylorModel":
        return self._series_function("sqrt")

    def rec(self) -> "UnitTaylorModel":
        series = self._series_function("rec")
        if series.error <= self.sweeper.target_accuracy:
            return series
        # Validate the series polynomial q a posteriori: with r = 1 - a*q,
        # 1/a = q/(1-r) and |1/a - q| <= |q| |r| / (1 - |r|).
        n = self.argument_count
        c = self.constant_term
        y = self - c
        best = series
        for order in (8, 16, 24):
            coeffs = taylor_coefficients("rec", Bounds(c), order)
            q = self.create_constant(coeffs[order].mid())
            for i in range(order - 1, -1, -1):
                q = q * y + coeffs[i].mid()
            q = UnitTaylorModel._raw(n, q.coefficients, 0.0, self.sweeper)
            r = (self * q - 1.0).norm()
            if not r < 1.0:
                continue
            bound = mul_up(q.norm(), div_up(r, math.nextafter(1.0 - r, 0.0)))
            if bound < best.error:
                best = UnitTaylorModel._raw(n, dict(q.coefficients), bound, self.sweeper)
            if best.error <= self.sweeper.target_accuracy:
                break
        return best

    def abs(self) -> "UnitTaylorModel":
        R = self.range()
        if R.lower >= 0:
            return self
        if R.upper <= 0:
            return -self
        return self.create_constant(R.abs())

    def max(self, other) -> "UnitTaylorModel":
        other = self._lift(other)
        return (self + other + (self - other).abs()).hlf()

    def min(self, other) -> "UnitTaylorModel":
        other = self._lift(other)
        return (self + other - (self - other).abs()).hlf()

    def apply_analytic(self, name: str) -> "UnitTaylorModel":
        if name in ("exp", "tan"):
            return getattr(self, name)()
        return self._series_function(name)

    # -- text -------------------------------------------------------------------
    def __repr__(self) -> str:
        return (f"UnitTaylorModel({self.argument_count}, {dict(self.terms)!r}, "
                f"error={self.error!r})")

    def __str__(self) -> str:
        return format_polynomial(self.coefficients, self.error)

    def to_json(self) -> dict:
        return {
            "args": self.argument_count,
            "terms": [{"alpha": list(a), "c": c} for a, c in self.terms],
            "error": self.error,
        }

    @classmethod
    def from_json(cls, data: dict, sweeper: Sweeper = DEFAULT_SWEEPER) -> "UnitTaylorModel":
        n = int(data["args"])
        coeffs = {tuple(t["alpha"]): float(t["c"]) for t in data["terms"]}
        return cls(n, coeffs, float(data["error"]), sweeper)


def _check_domain(name: str, R: Bounds) -> None:
    if name == "log" and not R.lower > 0:
        raise DomainError(f"log of a model with range {R}")
    if name == "sqrt" and not R.lower > 0:
        raise DomainError(f"sqrt of a model with range {R} touching zero")
    if name == "rec" and R.lower <= 0 <= R.upper:
        raise DomainError(f"reciprocal of a model with range {R} containing zero")


def _from_bounds_coefficients(n: int, acc: dict, error: float, sweeper: Sweeper) -> UnitTaylorModel:
    out = {}
    err = error
    for a, b in acc.items():
        m = b.mid()
        if m != 0:
            out[a] = m
        err = add_up(err, b.rad())
    if not math.isfinite(err):
        raise DomainError("Taylor model error bound overflowed")
    return UnitTaylorModel._raw(n, out, err, sweeper)


def format_coefficient(c: float) -> str:
    return f"{c:.4g}"


def format_polynomial(coefficients: dict, error: float, names=None) -> str:
    """Render as ``{ c*x0^2 +c*x0 +c+/-e}`` with terms in descending order."""
    keys = sorted(coefficients, key=graded_revlex_key, reverse=True)
    parts = []
    for a in keys:
        c = coefficients[a]
        mono = format_monomial(a, names)
        s = format_coefficient(c)
        if not s.startswith("-"):
            s = "+" + s
        parts.append(f"{s}*{mono}" if mono else s)
    body = " ".join(parts) if parts else "0"
    if body.startswith("+"):
        body = body[1:]
    return "{ " + body + f"+/-{error:.3g}" + "}"


def tm_add(a: UnitTaylorModel, b: UnitTaylorModel) -> UnitTaylorModel:
    return a + b


def tm_multiply(a: UnitTaylorModel, b: UnitTaylorModel, sweeper: Sweeper | None = None) -> UnitTaylorModel:
    if sweeper is not None:
        a = a.with_sweeper(sweeper)
    return a * b


def tm_range(a: UnitTaylorModel) -> Bounds:
    return a.range()


def tm_norm(a: UnitTaylorModel) -> float:
    return a.norm()


def tm_refines(a: UnitTaylorModel, b: UnitTaylorModel) -> bool:
    return a.refines(b)


def tm_sweep(a: UnitTaylorModel, sweeper: Sweeper) -> UnitTaylorModel:
    return a.sweep(sweeper)


# ---------------------------------------------------------------------------
# Affine models
# ---------------------------------------------------------------------------


class AffineModel:
    """First-order model b + sum a_i z_i +/- e over the unit box."""

    __slots__ = ("constant", "gradient", "error")

    def __init__(self, constant: float, gradient: Sequence[float], error: float = 0.0):
        self.constant = float(constant)
        self.gradient = [float(g) for g in gradient]
        if not error >= 0:
            raise ValueError("error bound must be nonnegative")
        self.error = float(error)

    @property
    def argument_count(self) -> int:
        return len(self.gradient)

    def _check(self, other: "AffineModel") -> None:
        if other.argument_count != self.argument_count:
            raise ShapeError("affine models have different argument counts")

    def __add__(self, other: "AffineModel") -> "AffineModel":
        self._check(other)
        err = add_up(self.error, other.error)
        b = self.constant + other.constant
        err = add_up(err, add_error(self.constant, other.constant, b))
        grad = []
        for x, y in zip(self.gradient, other.gradient):
            s = x + y
            err = add_up(err, add_error(x, y, s))
            grad.append(s)
        return AffineModel(b, grad, err)

    def __mul__(self, other: "AffineModel") -> "AffineModel":
        """Product with the quadratic part swept into the error bound."""
        self._check(other)
        b1, b2 = self.constant, other.constant
        a1, a2 = self.gradient, other.gradient
        e1, e2 = self.error, other.error
        b = b1 * b2
        err = mul_error(b1, b2, b)
        grad = []
        for x, y in zip(a1, a2):
            p, q = b1 * y, b2 * x
            s = p + q
            err = add_up(err, mul_error(b1, y, p))
            err = add_up(err, mul_error(b2, x, q))
            err = add_up(err, add_error(p, q, s))
            grad.append(s)
        n1 = sum_up(abs(x) for x in a1)
        n2 = sum_up(abs(y) for y in a2)
        err = add_up(err, mul_up(n1, n2))
        err = add_up(err, mul_up(add_up(abs(b1), n1), e2))
        err = add_up(err, mul_up(add_up(abs(b2), n2), e1))
        err = add_up(err, mul_up(e1, e2))
        return AffineModel(b, grad, err)

    def range(self) -> Bounds:
        r = add_up(sum_up(abs(x) for x in self.gradient), self.error)
        return Bounds.centred(self.constant, r)

    def to_taylor_model(self, sweeper: Sweeper = DEFAULT_SWEEPER) -> UnitTaylorModel:
        n = self.argument_count
        coeffs = {(0,) * n: self.constant}
        for i, g in enumerate(self.gradient):
            coeffs[tuple(1 if k == i else 0 for k in range(n))] = g
        return UnitTaylorModel(n, coeffs, self.error, sweeper)

    def __repr__(self) -> str:
        return f"AffineModel({self.constant!r}, {self.gradient!r}, error={self.error!r})"


def affine_multiply(a: AffineModel, b: AffineModel) -> AffineModel:
    return a * b


__all__ = [
    "UnitTaylorModel", "AffineModel", "Sweeper", "threshold_sweeper", "graded_sweeper",
    "NULL_SWEEPER", "DEFAULT_SWEEPER", "DEFAULT_THRESHOLD", "horner", "tm_add", "tm_multiply",
    "tm_range", "tm_norm", "tm_refines", "tm_sweep", "affine_multiply", "set_error_mode",
    "format_polynomial",
]

"""Symbolic functions and validated function patches over boxes.

:class:`ExpressionFunction` is a DAG of elementary operations that can be
evaluated over any algebra: floats, exact rationals, :class:`Bounds`,
differentials, Taylor models or patches.  :class:`FunctionPatch` couples a
:class:`UnitTaylorModel` with the affine scaling of a box domain, giving a
concrete validated function on that box.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .algebra import BINARY_FUNCTIONS, UNARY_FUNCTIONS, apply_binary, apply_pow, apply_unary, constant_like
from .differential import Differential
from .errors import DomainError, ShapeError
from .numerics import Bounds, coerce_bounds, rational_down, rational_up
from .taylor_model import DEFAULT_SWEEPER, Sweeper, UnitTaylorModel, format_polynomial

# ---------------------------------------------------------------------------
# Expression DAG
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Expr:
    """Node of an expression DAG; nodes are shared by identity."""

    op: str
    args: tuple = ()
    value: Fraction | None = None
    index: int | None = None
    exponent: int | None = None

    # -- operator sugar --------------------------------------------------------
    def __add__(self, other) -> "Expr":
        return add(self, as_expr(other))

    def __radd__(self, other) -> "Expr":
        return add(as_expr(other), self)

    def __sub__(self, other) -> "Expr":
        return sub(self, as_expr(other))

    def __rsub__(self, other) -> "Expr":
        return sub(as_expr(other), self)

    def __mul__(self, other) -> "Expr":
        return mul(self, as_expr(other))

    def __rmul__(self, other) -> "Expr":
        return mul(as_expr(other), self)

    def __truediv__(self, other) -> "Expr":
        return div(self, as_expr(other))

    def __rtruediv__(self, other) -> "Expr":
        return div(as_expr(other), self)

    def __neg__(self) -> "Expr":
        return neg(self)

    def __pow__(self, k: int) -> "Expr":
        return power(self, k)

    def is_constant(self, q=None) -> bool:
        return self.op == "const" and (q is None or self.value == q)

    def __str__(self) -> str:
        return format_expr(self)

    def __repr__(self) -> str:
        return f"Expr({format_expr(self)})"


def constant(q) -> Expr:
    if isinstance(q, Expr):
        return q
    if isinstance(q, float):
        q = Fraction(q)
    return Expr("const", value=Fraction(q))


def coordinate(i: int) -> Expr:
    if i < 0:
        raise IndexError("coordinate index must be nonnegative")
    return Expr("coord", index=i)


def as_expr(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, float, Fraction)):
        return constant(x)
    raise TypeError(f"cannot convert {type(x).__name__} to an expression")


ZERO = constant(0)
ONE = constant(1)


def add(a: Expr, b: Expr) -> Expr:
    if a.is_constant(0):
        return b
    if b.is_constant(0):
        return a
    if a.op == "const" and b.op == "const":
        return constant(a.value + b.value)
    return Expr("add", (a, b))


def sub(a: Expr, b: Expr) -> Expr:
    if b.is_constant(0):
        return a
    if a.is_constant(0):
        return neg(b)
    if a.op == "const" and b.op == "const":
        return constant(a.value - b.value)
    return Expr("sub", (a, b))


def mul(a: Expr, b: Expr) -> Expr:
    if a.is_constant(0) or b.is_constant(0):
        return ZERO
    if a.is_constant(1):
        return b
    if b.is_constant(1):
        return a
    if a.op == "const" and b.op == "const":
        return constant(a.value * b.value)
    return Expr("mul", (a, b))


def div(a: Expr, b: Expr) -> Expr:
    if b.is_constant(0):
        raise DomainError("division by the constant zero")
    if a.is_constant(0):
        return ZERO
    if b.is_constant(1):
        return a
    if a.op == "const" and b.op == "const":
        return constant(a.value / b.value)
    return Expr("div", (a, b))


def neg(a: Expr) -> Expr:
    if a.op == "const":
        return constant(-a.value)
    if a.op == "neg":
        return a.args[0]
    return Expr("neg", (a,))


def power(a: Expr, k: int) -> Expr:
    if not isinstance(k, int):
        raise TypeError("only integer powers are supported")
    if k == 0:
        return ONE
    if k == 1:
        return a
    if a.op == "const":
        if a.value == 0 and k < 0:
            raise DomainError("negative power of zero")
        return constant(a.value**k)
    return Expr("pow", (a,), exponent=k)


def unary(name: str, a) -> Expr:
    a = as_expr(a)
    if name not in UNARY_FUNCTIONS:
        raise ValueError(f"unknown function {name!r}")
    if name == "neg":
        return neg(a)
    return Expr(name, (a,))


def binary(name: str, a, b) -> Expr:
    a, b = as_expr(a), as_expr(b)
    builders = {"add": add, "sub": sub, "mul": mul, "div": div}
    if name in builders:
        return builders[name](a, b)
    if name not in BINARY_FUNCTIONS:
        raise ValueError(f"unknown binary function {name!r}")
    return Expr(name, (a, b))


def exp(a) -> Expr:
    return unary("exp", a)


def log(a) -> Expr:
    return unary("log", a)


def sin(a) -> Expr:
    return unary("sin", a)


def cos(a) -> Expr:
    return unary("cos", a)


def tan(a) -> Expr:
    return unary("tan", a)


def atan(a) -> Expr:
    return unary("atan", a)


def sqrt(a) -> Expr:
    return unary("sqrt", a)


def rec(a) -> Expr:
    return unary("rec", a)


def sqr(a) -> Expr:
    return unary("sqr", a)


def hlf(a) -> Expr:
    return unary("hlf", a)


def abs_(a) -> Expr:
    return unary("abs", a)


def max_(a, b) -> Expr:
    return binary("max", a, b)


def min_(a, b) -> Expr:
    return binary("min", a, b)


def _postorder(roots: Iterable[Expr]) -> list[Expr]:
    order: list[Expr] = []
    seen: set[int] = set()
    for root in roots:
        stack = [(root, False)]
        while stack:
            node, done = stack.pop()
            if done:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for a in reversed(node.args):
                if id(a) not in seen:
                    stack.append((a, False))
    return order


def evaluate_nodes(roots: Sequence[Expr], args: Sequence, const=None) -> list:
    """Evaluate expression roots over the algebra of ``args``.

    ``const`` lifts a Fraction into the algebra; by default it is derived
    from the first argument.
    """
    if const is None:
        proto = args[0] if len(args) else Fraction(0)
        const = lambda q: constant_like(proto, q)  # noqa: E731
    values: dict[int, object] = {}
    for node in _postorder(roots):
        op = node.op
        if op == "const":
            v = const(node.value)
        elif op == "coord":
            if node.index >= len(args):
                raise ShapeError(f"coordinate {node.index} out of range for {len(args)} arguments")
            v = args[node.index]
        elif op == "pow":
            v = apply_pow(values[id(node.args[0])], node.exponent)
        elif len(node.args) == 1:
            v = apply_unary(op, values[id(node.args[0])])
        else:
            v = apply_binary(op, values[id(node.args[0])], values[id(node.args[1])])
        values[id(node)] = v
    return [values[id(r)] for r in roots]


def differentiate(node: Expr, k: int, memo: dict | None = None) -> Expr:
    """Symbolic partial derivative with respect to coordinate ``k``."""
    memo = {} if memo is None else memo
    for n in _postorder([node]):
        memo.setdefault(id(n), None)
        if memo[id(n)] is not None:
            continue
        memo[id(n)] = _derivative_rule(n, k, memo)
    return memo[id(node)]


def _derivative_rule(n: Expr, k: int, memo: dict) -> Expr:
    op = n.op
    if op == "const":
        return ZERO
    if op == "coord":
        return ONE if n.index == k else ZERO
    a = n.args[0]
    da = memo[id(a)]
    if op == "pow":
        e = n.exponent
        return mul(mul(constant(e), power(a, e - 1)), da)
    if len(n.args) == 2:
        b = n.args[1]
        db = memo[id(b)]
        if op == "add":
            return add(da, db)
        if op == "sub":
            return sub(da, db)
        if op == "mul":
            return add(mul(da, b), mul(a, db))
        if op == "div":
            return sub(div(da, b), div(mul(a, db), power(b, 2)))
        if op in ("max", "min"):
            s = div(sub(a, b), Expr("abs", (sub(a, b),)))
            sign = 1 if op == "max" else -1
            return mul(constant(Fraction(1, 2)),
                       add(add(da, db), mul(mul(constant(sign), s), sub(da, db))))
        raise ValueError(f"no derivative rule for {op!r}")
    if da.is_constant(0):
        return ZERO
    if op == "neg":
        return neg(da)
    if op == "rec":
        return neg(mul(da, power(Expr("rec", (a,)), 2)))
    if op == "sqr":
        return mul(mul(constant(2), a), da)
    if op == "hlf":
        return Expr("hlf", (da,))
    if op == "sqrt":
        return div(da, mul(constant(2), n))
    if op == "exp":
        return mul(n, da)
    if op == "log":
        return div(da, a)
    if op == "sin":
        return mul(Expr("cos", (a,)), da)
    if op == "cos":
        return neg(mul(Expr("sin", (a,)), da))
    if op == "tan":
        return mul(add(ONE, power(n, 2)), da)
    if op == "atan":
        return div(da, add(ONE, power(a, 2)))
    if op == "abs":
        return mul(div(a, n), da)
    raise ValueError(f"no derivative rule for {op!r}")


def substitute(roots: Sequence[Expr], replacements: Sequence[Expr]) -> list[Expr]:
    """Replace coordinate i by ``replacements[i]`` throughout."""
    new: dict[int, Expr] = {}
    for n in _postorder(roots):
        if n.op == "coord":
            if n.index >= len(replacements):
                raise ShapeError(f"coordinate {n.index} has no replacement")
            r = replacements[n.index]
        elif n.op == "const":
            r = n
        else:
            args = tuple(new[id(a)] for a in n.args)
            if n.op == "pow":
                r = power(args[0], n.exponent)
            elif n.op in ("add", "sub", "mul", "div"):
                r = binary(n.op, *args)
            elif n.op == "neg":
                r = neg(args[0])
            else:
                r = Expr(n.op, args)
        new[id(n)] = r
    return [new[id(r)] for r in roots]


_PRECEDENCE = {"add": 1, "sub": 1, "mul": 2, "div": 2, "neg": 3, "pow": 4}
_SYMBOL = {"add": "+", "sub": "-", "mul": "*", "div": "/"}


def format_expr(node: Expr, names: Sequence[str] | None = None) -> str:
    def fmt(n: Expr) -> tuple[str, int]:
        op = n.op
        if op == "const":
            v = n.value
            s = str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
            return s, (5 if v >= 0 and v.denominator == 1 else 2)
        if op == "coord":
            return (names[n.index] if names else f"x{n.index}"), 5
        if op in _SYMBOL:
            p = _PRECEDENCE[op]
            ls, lp = fmt(n.args[0])
            rs, rp = fmt(n.args[1])
            if lp < p:
                ls = f"({ls})"
            if rp <= p and not (op in ("add", "mul") and rp == p):
                rs = f"({rs})"
            return f"{ls}{_SYMBOL[op]}{rs}", p
        if op == "neg":
            s, p = fmt(n.args[0])
            return (f"-({s})" if p < 4 else f"-{s}"), 3
        if op == "pow":
            s, p = fmt(n.args[0])
            if p < 5:
                s = f"({s})"
            return f"{s}^{n.exponent}", 4
        inner = ",".join(fmt(a)[0] for a in n.args)
        return f"{op}({inner})", 5

    return fmt(node)[0]


class ExpressionFunction:
    """Vector-valued function R^n -> R^m given by an expression DAG.

    Args:
        argument_count: n.
        outputs: m expression roots.
        argument_names: optional names used for printing.
    """

    def __init__(self, argument_count: int, outputs: Sequence[Expr | int | Fraction],
                 argument_names: Sequence[str] | None = None):
        self.argument_count = int(argument_count)
        self.outputs = tuple(as_expr(o) for o in outputs)
        self.argument_names = tuple(argument_names) if argument_names else None
        for node in _postorder(self.outputs):
            if node.op == "coord" and node.index >= self.argument_count:
                raise ShapeError(
                    f"coordinate {node.index} out of range for {self.argument_count} arguments")

    @classmethod
    def identity(cls, n: int) -> "ExpressionFunction":
        return cls(n, [coordinate(i) for i in range(n)])

    @classmethod
    def constant_function(cls, n: int, values: Sequence) -> "ExpressionFunction":
        return cls(n, [constant(v) for v in values])

    @classmethod
    def coordinates(cls, n: int) -> list[Expr]:
        return [coordinate(i) for i in range(n)]

    @property
    def result_count(self) -> int:
        return len(self.outputs)

    def __len__(self) -> int:
        return self.result_count

    def __getitem__(self, i: int) -> "ExpressionFunction":
        return ExpressionFunction(self.argument_count, [self.outputs[i]], self.argument_names)

    def __call__(self, args: Sequence) -> list:
        return self.evaluate(args)

    def evaluate(self, args: Sequence) -> list:
        args = list(args)
        if len(args) != self.argument_count:
            raise ShapeError(f"expected {self.argument_count} arguments, got {len(args)}")
        return evaluate_nodes(self.outputs, args)

    def evaluate_bounds(self, args: Sequence) -> list[Bounds]:
        return self.evaluate([coerce_bounds(a) for a in args])

    def differential(self, point: Sequence, degree: int) -> list[Differential]:
        """Taylor expansions of all outputs at ``point`` up to ``degree``."""
        if len(point) != self.argument_count:
            raise ShapeError("point dimension differs from argument count")
        xs = Differential.variables(point, degree) if degree >= 1 else \
            [Differential.constant(p, self.argument_count, 0) for p in point]
        return self.evaluate(xs)

    def jacobian(self, point: Sequence) -> list[list]:
        """Jacobian matrix over the algebra of ``point`` (e.g. Bounds for a box)."""
        ds = self.differential(point, 1)
        return [d.gradient() for d in ds]

    def derivative(self, k: int) -> "ExpressionFunction":
        if not 0 <= k < self.argument_count:
            raise IndexError(f"derivative index {k} out of range")
        memo: dict = {}
        return ExpressionFunction(self.argument_count,
                                  [differentiate(o, k, memo) for o in self.outputs],
                                  self.argument_names)

    def compose(self, inner: "ExpressionFunction") -> "ExpressionFunction":
        """self o inner."""
        if inner.result_count != self.argument_count:
            raise ShapeError("inner result count differs from outer argument count")
        return ExpressionFunction(inner.argument_count, substitute(self.outputs, inner.outputs),
                                  inner.argument_names)

    def join(self, other: "ExpressionFunction") -> "ExpressionFunction":
        """x -> (self(x), other(x))."""
        if other.argument_count != self.argument_count:
            raise ShapeError("join needs equal argument counts")
        return ExpressionFunction(self.argument_count, self.outputs + other.outputs, self.argument_names)

    def combine(self, other: "ExpressionFunction") -> "ExpressionFunction":
        """(x, y) -> (self(x), other(y))."""
        n = self.argument_count
        shifted = substitute(other.outputs, [coordinate(n + i) for i in range(other.argument_count)])
        names = None
        if self.argument_names and other.argument_names:
            names = self.argument_names + other.argument_names
        return ExpressionFunction(n + other.argument_count, self.outputs + tuple(shifted), names)

    def lie_derivative(self, field: "ExpressionFunction") -> "ExpressionFunction":
        """(grad g . f) for each output g of this function and vector field f."""
        if field.result_count != self.argument_count or field.argument_count != self.argument_count:
            raise ShapeError("vector field dimensions do not match")
        outs = []
        for g in range(self.result_count):
            acc = ZERO
            for k in range(self.argument_count):
                dk = self[g].derivative(k).outputs[0]
                acc = add(acc, mul(dk, field.outputs[k]))
            outs.append(acc)
        return ExpressionFunction(self.argument_count, outs, self.argument_names)

    def __str__(self) -> str:
        body = ", ".join(format_expr(o, self.argument_names) for o in self.outputs)
        return f"[{body}]"

    def __repr__(self) -> str:
        return f"ExpressionFunction({self.argument_count}, {self})"


# ---------------------------------------------------------------------------
# Box domains and scaling
# ---------------------------------------------------------------------------


def _lower_float(x) -> float:
    if isinstance(x, Bounds):
        return x.lower
    return rational_down(Fraction(x)) if not isinstance(x, float) else x


def _upper_float(x) -> float:
    if isinstance(x, Bounds):
        return x.upper
    return rational_up(Fraction(x)) if not isinstance(x, float) else x


@dataclass(frozen=True)
class BoxDomain:
    """Product of closed intervals with float endpoints.

    Rational or decimal endpoints are rounded outward on construction.
    """

    intervals: tuple[tuple[float, float], ...]

    def __init__(self, intervals: Iterable):
        ivs = []
        for iv in intervals:
            if isinstance(iv, Bounds):
                a, b = iv.lower, iv.upper
            else:
                lo, hi = iv
                a, b = _lower_float(lo), _upper_float(hi)
            if not (math.isfinite(a) and math.isfinite(b)):
                raise DomainError("box domains must be bounded")
            if a > b:
                raise DomainError(f"empty interval [{a}:{b}] in box domain")
            ivs.append((float(a), float(b)))
        object.__setattr__(self, "intervals", tuple(ivs))

    @classmethod
    def from_bounds(cls, bounds: Sequence[Bounds]) -> "BoxDomain":
        return cls(list(bounds))

    @property
    def dimension(self) -> int:
        return len(self.intervals)

    def __len__(self) -> int:
        return self.dimension

    def __getitem__(self, i: int) -> Bounds:
        a, b = self.intervals[i]
        return Bounds(a, b)

    def bounds(self) -> list[Bounds]:
        return [Bounds(a, b) for a, b in self.intervals]

    def midpoint(self) -> list[float]:
        return [Bounds(a, b).mid() for a, b in self.intervals]

    def contains_point(self, x: Sequence) -> bool:
        return all(Bounds(a, b).contains(v) for (a, b), v in zip(self.intervals, x))

    def contains_box(self, box: Sequence[Bounds]) -> bool:
        return all(a <= v.lower and v.upper <= b for (a, b), v in zip(self.intervals, box))

    def split(self, j: int) -> tuple["BoxDomain", "BoxDomain"]:
        lo, hi = self[j].split()
        left = list(self.intervals)
        right = list(self.intervals)
        left[j] = (lo.lower, lo.upper)
        right[j] = (hi.lower, hi.upper)
        return BoxDomain(left), BoxDomain(right)

    def product(self, other: "BoxDomain") -> "BoxDomain":
        return BoxDomain(self.intervals + other.intervals)

    def __str__(self) -> str:
        return "[" + ",".join(f"{{{a!r}:{b!r}}}" for a, b in self.intervals) + "]"


@dataclass(frozen=True)
class ScalingMap:
    """Affine bijection x_i = r_i z_i + c_i between the unit box and a domain."""

    centres: tuple[Bounds, ...]
    radii: tuple[Bounds, ...]

    @classmethod
    def for_domain(cls, domain: BoxDomain) -> "ScalingMap":
        cs, rs = [], []
        for a, b in domain.intervals:
            A, B = Bounds(a), Bounds(b)
            cs.append((A + B).hlf())
            rs.append((B - A).hlf())
        return cls(tuple(cs), tuple(rs))

    def is_degenerate(self, i: int) -> bool:
        return self.radii[i].upper == 0

    def unscale(self, i: int, x) -> Bounds:
        """Enclosure of s_i^{-1}(x) clipped to [-1,1]; degenerate coordinates map to 0."""
        if self.is_degenerate(i):
            return Bounds(0.0)
        z = (coerce_bounds(x) - self.centres[i]) / self.radii[i]
        clipped = z.intersection(Bounds(-1.0, 1.0))
        if clipped is None:
            raise DomainError(f"value {x} lies outside the domain")
        return clipped

    def scale(self, i: int, z) -> Bounds:
        return self.radii[i] * coerce_bounds(z) + self.centres[i]


# ---------------------------------------------------------------------------
# Function patches
# ---------------------------------------------------------------------------


def _check_same_domain(a: "FunctionPatch", b: "FunctionPatch") -> None:
    if a.domain != b.domain:
        raise ShapeError(f"patch domains differ: {a.domain} vs {b.domain}")


class FunctionPatch:
    """Scalar validated function on a box: a unit Taylor model behind a scaling.

    Represents every f with sup_{x in D} |f(x) - p(s^{-1}(x))| <= e.
    """

    __slots__ = ("domain", "scaling", "model")

    def __init__(self, domain: BoxDomain, model: UnitTaylorModel, scaling: ScalingMap | None = None):
        if model.argument_count != domain.dimension:
            raise ShapeError("model argument count differs from domain dimension")
        self.domain = domain
        self.model = model
        self.scaling = scaling or ScalingMap.for_domain(domain)

    # -- construction ---------------------------------------------------------
    @classmethod
    def constant(cls, domain: BoxDomain, value, sweeper: Sweeper = DEFAULT_SWEEPER) -> "FunctionPatch":
        return cls(domain, UnitTaylorModel.constant(domain.dimension, value, sweeper))

    @classmethod
    def coordinate(cls, domain: BoxDomain, i: int, sweeper: Sweeper = DEFAULT_SWEEPER) -> "FunctionPatch":
        n = domain.dimension
        s = ScalingMap.for_domain(domain)
        m = UnitTaylorModel.constant(n, s.centres[i], sweeper)
        if not s.is_degenerate(i):
            m = m + UnitTaylorModel.variable(n, i, sweeper).scale(s.radii[i])
        return cls(domain, m, s)

    @classmethod
    def identity(cls, domain: BoxDomain, sweeper: Sweeper = DEFAULT_SWEEPER) -> "VectorFunctionPatch":
        return VectorFunctionPatch([cls.coordinate(domain, i, sweeper) for i in range(domain.dimension)])

    def create_constant(self, value) -> "FunctionPatch":
        return FunctionPatch(self.domain, self.model.create_constant(value), self.scaling)

    def _wrap(self, model: UnitTaylorModel) -> "FunctionPatch":
        return FunctionPatch(self.domain, model, self.scaling)

    @property
    def sweeper(self) -> Sweeper:
        return self.model.sweeper

    @property
    def error(self) -> float:
        return self.model.error

    @property
    def argument_count(self) -> int:
        return self.domain.dimension

    # -- arithmetic -------------------------------------------------------------
    def _other_model(self, other):
        if isinstance(other, FunctionPatch):
            _check_same_domain(self, other)
            return other.model
        if isinstance(other, (int, float, Fraction, Bounds)):
            return other
        return None

    def __add__(self, other) -> "FunctionPatch":
        o = self._other_model(other)
        return NotImplemented if o is None else self._wrap(self.model + o)

    def __radd__(self, other) -> "FunctionPatch":
        o = self._other_model(other)
        return NotImplemented if o is None else self._wrap(self.model + o)

    def __sub__(self, other) -> "FunctionPatch":
        o = self._other_model(other)
        return NotImplemented if o is None else self._wrap(self.model - o)

    def __rsub__(self, other) -> "FunctionPatch":
        o = self._other_model(other)
        return NotImplemented if o is None else self._wrap(o - self.model)

    def __mul__(self, other) -> "FunctionPatch":
        o = self._other_model(other)
        return NotImplemented if o is None else self._wrap(self.model * o)

    def __rmul__(self, other) -> "FunctionPatch":
        o = self._other_model(other)
        return NotImplemented if o is None else self._wrap(self.model * o)

    def __truediv__(self, other) -> "FunctionPatch":
        o = self._other_model(other)
        return NotImplemented if o is None else self._wrap(self.model / o)

    def __rtruediv__(self, other) -> "FunctionPatch":
        o = self._other_model(other)
        return NotImplemented if o is None else self._wrap(self.model.rec() * o)

    def __neg__(self) -> "FunctionPatch":
        return self._wrap(-self.model)

    def pow(self, k: int) -> "FunctionPatch":
        return self._wrap(self.model.pow(k))

    __pow__ = pow

    def _unary(name):
        def method(self) -> "FunctionPatch":
            return self._wrap(getattr(self.model, name)())
        method.__name__ = name
        return method

    exp = _unary("exp")
    log = _unary("log")
    sin = _unary("sin")
    cos = _unary("cos")
    tan = _unary("tan")
    atan = _unary("atan")
    sqrt = _unary("sqrt")
    rec = _unary("rec")
    abs = _unary("abs")
    hlf = _unary("hlf")
    sqr = _unary("sqr")
    del _unary

    def max(self, other) -> "FunctionPatch":
        return self._wrap(self.model.max(self._other_model(other)))

    def min(self, other) -> "FunctionPatch":
        return self._wrap(self.model.min(self._other_model(other)))

    def sweep(self, sweeper: Sweeper | None = None) -> "FunctionPatch":
        return self._wrap(self.model.sweep(sweeper))

    def refines(self, other: "FunctionPatch", strict: bool = False) -> bool:
        _check_same_domain(self, other)
        return self.model.refines(other.model, strict)

    def midpoint(self) -> "FunctionPatch":
        """The polynomial part alone, with zero error."""
        m = self.model
        return self._wrap(UnitTaylorModel(m.argument_count, dict(m.coefficients), 0.0, m.sweeper))

    # -- evaluation -------------------------------------------------------------
    def unit_arguments(self, x: Sequence) -> list[Bounds]:
        if len(x) != self.domain.dimension:
            raise ShapeError("argument count differs from domain dimension")
        out = []
        for i, v in enumerate(x):
            b = coerce_bounds(v)
            lo, hi = self.domain.intervals[i]
            if b.lower < lo or b.upper > hi:
                raise DomainError(f"argument {b} outside domain interval [{lo}:{hi}]")
            out.append(self.scaling.unscale(i, b))
        return out

    def evaluate(self, x: Sequence) -> Bounds:
        """Enclosure of f(x) for a point or box ``x`` inside the domain."""
        return self.model.evaluate(self.unit_arguments(x))

    __call__ = evaluate

    def range(self) -> Bounds:
        return self.model.range()

    # -- calculus and restriction -------------------------------------------------
    def compose(self, inner: Sequence["FunctionPatch"]) -> "FunctionPatch":
        """self o inner, with inner patches sharing a domain mapping into ours."""
        return self._compose_models(inner, check_range=True)

    def _compose_models(self, inner: Sequence["FunctionPatch"], check_range: bool) -> "FunctionPatch":
        inner = list(inner)
        if len(inner) != self.domain.dimension:
            raise ShapeError("composition needs one inner patch per argument")
        base = inner[0]
        for g in inner[1:]:
            _check_same_domain(base, g)
        units = []
        for i, g in enumerate(inner):
            r = g.range()
            lo, hi = self.domain.intervals[i]
            if check_range and (r.lower < lo or r.upper > hi):
                raise DomainError(f"inner range {r} escapes domain interval [{lo}:{hi}]")
            if self.scaling.is_degenerate(i):
                units.append(g.model.create_zero())
            else:
                units.append((g.model - self.scaling.centres[i]).scale(Bounds(1.0) / self.scaling.radii[i]))
        # The range test above is made in domain coordinates; the unit models
        # may overshoot [-1,1] only by rounding, so the model-level test is skipped.
        model = self.model.compose(units, check=False)
        return FunctionPatch(base.domain, model, base.scaling)

    def antidifferentiate(self, j: int) -> "FunctionPatch":
        """Antiderivative in x_j vanishing on the hyperplane x_j = centre_j."""
        if self.scaling.is_degenerate(j):
            return self._wrap(self.model.create_zero())
        return self._wrap(self.model.antidifferentiate(j, self.scaling.radii[j]))

    def derivative_of_midpoint(self, j: int) -> "FunctionPatch":
        if self.scaling.is_degenerate(j):
            return self._wrap(self.model.create_zero())
        return self._wrap(self.model.derivative_of_midpoint(j, self.scaling.radii[j]))

    def split(self, j: int) -> tuple["FunctionPatch", "FunctionPatch"]:
        lo_dom, hi_dom = self.domain.split(j)
        if self.scaling.is_degenerate(j):
            return FunctionPatch(lo_dom, self.model), FunctionPatch(hi_dom, self.model)
        a, b = self.domain.intervals[j]
        mid = Bounds(a, b).mid()
        if Fraction(mid) * 2 == Fraction(a) + Fraction(b):
            return (FunctionPatch(lo_dom, self.model.split_restrict(j, "lower")),
                    FunctionPatch(hi_dom, self.model.split_restrict(j, "upper")))
        return self.restrict(lo_dom), self.restrict(hi_dom)

    def restrict(self, subdomain: BoxDomain) -> "FunctionPatch":
        """Restriction to a sub-box of the domain."""
        if subdomain.dimension != self.domain.dimension:
            raise ShapeError("subdomain dimension differs")
        for (a, b), (c, d) in zip(subdomain.intervals, self.domain.intervals):
            if a < c or b > d:
                raise DomainError(f"subdomain {subdomain} is not inside {self.domain}")
        new_scaling = ScalingMap.for_domain(subdomain)
        n = self.domain.dimension
        sw = self.model.sweeper
        inner = []
        for i in range(n):
            if self.scaling.is_degenerate(i):
                inner.append(UnitTaylorModel.zero(n, sw))
                continue
            shift = (new_scaling.centres[i] - self.scaling.centres[i]) / self.scaling.radii[i]
            m = UnitTaylorModel.constant(n, shift, sw)
            if not new_scaling.is_degenerate(i):
                ratio = new_scaling.radii[i] / self.scaling.radii[i]
                m = m + UnitTaylorModel.variable(n, i, sw).scale(ratio)
            inner.append(m)
        # The exact affine maps land in [-1,1]; only rounding can push the
        # enclosing models slightly outside, so the range check is skipped.
        model = self.model.compose(inner, check=False)
        return FunctionPatch(subdomain, model, new_scaling)

    def partial_evaluate(self, j: int, value) -> "FunctionPatch":
        """Fix x_j = value; the domain keeps its dimension with x_j degenerate."""
        b = coerce_bounds(value)
        lo, hi = self.domain.intervals[j]
        if b.lower < lo or b.upper > hi:
            raise DomainError(f"value {b} outside domain interval [{lo}:{hi}]")
        z = self.scaling.unscale(j, b)
        model = self.model.partial_evaluate(j, z)
        intervals = list(self.domain.intervals)
        intervals[j] = (b.lower, b.upper)
        # A non-point value keeps its interval as the coordinate range, with
        # no remaining dependence on it.
        return FunctionPatch(BoxDomain(intervals), model)

    def embed(self, extra: BoxDomain, before: bool = False) -> "FunctionPatch":
        """Extend the domain by extra coordinates that the function ignores."""
        n, k = self.domain.dimension, extra.dimension
        if before:
            model = self.model.embed(n + k, [k + i for i in range(n)])
            return FunctionPatch(extra.product(self.domain), model)
        model = self.model.embed(n + k, list(range(n)))
        return FunctionPatch(self.domain.product(extra), model)

    # -- text ---------------------------------------------------------------------
    def centred_polynomial(self) -> dict[tuple[int, ...], Fraction]:
        """Exact coefficients of p(s^{-1}(x)) as a polynomial in x."""
        n = self.domain.dimension
        poly: dict[tuple[int, ...], Fraction] = {}
        cs = [Fraction(c.mid()) for c in self.scaling.centres]
        rs = [Fraction(r.mid()) for r in self.scaling.radii]
        for alpha, c in self.model.coefficients.items():
            term = {(0,) * n: Fraction(c)}
            for i, e in enumerate(alpha):
                if e == 0:
                    continue
                if rs[i] == 0:
                    term = {}
                    break
                # ((x_i - c_i)/r_i)^e expanded by the binomial theorem
                lin = {}
                for k in range(e + 1):
                    coef = Fraction(math.comb(e, k)) * (-cs[i]) ** (e - k) / rs[i] ** e
                    lin[k] = coef
                new = {}
                for a, v in term.items():
                    for k, w in lin.items():
                        b = a[:i] + (a[i] + k,) + a[i + 1:]
                        new[b] = new.get(b, 0) + v * w
                term = new
            for a, v in term.items():
                poly[a] = poly.get(a, 0) + v
        return {a: v for a, v in poly.items() if v != 0}

    def polynomial_text(self, names: Sequence[str] | None = None) -> str:
        poly = {a: float(v) for a, v in self.centred_polynomial().items()}
        poly = {a: v for a, v in poly.items() if v != 0}
        return format_polynomial(poly, self.model.error, names)

    def to_json(self) -> dict:
        return {"domain": [list(iv) for iv in self.domain.intervals], "model": self.model.to_json()}

    @classmethod
    def from_json(cls, data: dict, sweeper: Sweeper = DEFAULT_SWEEPER) -> "FunctionPatch":
        dom = BoxDomain([tuple(iv) for iv in data["domain"]])
        return cls(dom, UnitTaylorModel.from_json(data["model"], sweeper))

    def __repr__(self) -> str:
        return f"FunctionPatch(dom={self.domain}, model={self.model!r})"

    def __str__(self) -> str:
        return (f"ScaledFunctionPatch(dom={self.domain}, rng={_range_text(self.range())}, "
                f"{self.polynomial_text()})")


def _range_text(b: Bounds) -> str:
    return f"{{{b.lower:.8g}:{b.upper:.8g}}}"


class VectorFunctionPatch:
    """Vector of scalar patches sharing one box domain."""

    __slots__ = ("components",)

    def __init__(self, components: Sequence[FunctionPatch]):
        comps = list(components)
        if not comps:
            raise ShapeError("a vector patch needs at least one component")
        for c in comps[1:]:
            _check_same_domain(comps[0], c)
        self.components = comps

    @property
    def domain(self) -> BoxDomain:
        return self.components[0].domain

    @property
    def result_count(self) -> int:
        return len(self.components)

    def __len__(self) -> int:
        return len(self.components)

    def __getitem__(self, i: int) -> FunctionPatch:
        return self.components[i]

    def __iter__(self):
        return iter(self.components)

    @property
    def errors(self) -> list[float]:
        return [c.error for c in self.components]

    def evaluate(self, x: Sequence) -> list[Bounds]:
        return [c.evaluate(x) for c in self.components]

    __call__ = evaluate

    def range(self) -> list[Bounds]:
        return [c.range() for c in self.components]

    def compose(self, inner) -> "VectorFunctionPatch":
        inner = list(inner)
        return VectorFunctionPatch([c.compose(inner) for c in self.components])

    def antidifferentiate(self, j: int) -> "VectorFunctionPatch":
        return VectorFunctionPatch([c.antidifferentiate(j) for c in self.components])

    def split(self, j: int) -> tuple["VectorFunctionPatch", "VectorFunctionPatch"]:
        parts = [c.split(j) for c in self.components]
        return VectorFunctionPatch([p[0] for p in parts]), VectorFunctionPatch([p[1] for p in parts])

    def restrict(self, subdomain: BoxDomain) -> "VectorFunctionPatch":
        return VectorFunctionPatch([c.restrict(subdomain) for c in self.components])

    def partial_evaluate(self, j: int, value) -> "VectorFunctionPatch":
        return VectorFunctionPatch([c.partial_evaluate(j, value) for c in self.components])

    def refines(self, other: "VectorFunctionPatch", strict: bool = False) -> bool:
        return all(a.refines(b, strict) for a, b in zip(self.components, other.components))

    def midpoint(self) -> "VectorFunctionPatch":
        return VectorFunctionPatch([c.midpoint() for c in self.components])

    def to_json(self) -> dict:
        return {
            "domain": [list(iv) for iv in self.domain.intervals],
            "models": [c.model.to_json() for c in self.components],
        }

    @classmethod
    def from_json(cls, data: dict, sweeper: Sweeper = DEFAULT_SWEEPER) -> "VectorFunctionPatch":
        dom = BoxDomain([tuple(iv) for iv in data["domain"]])
        return cls([FunctionPatch(dom, UnitTaylorModel.from_json(m, sweeper)) for m in data["models"]])

    def __repr__(self) -> str:
        return f"VectorFunctionPatch({self.components!r})"

    def text(self, names: Sequence[str] | None = None) -> str:
        rng = ",".join(_range_text(r) for r in self.range())
        polys = ",\n      ".join(c.polynomial_text(names) for c in self.components)
        return (f"VectorScaledFunctionPatch(\n    dom={self.domain},\n    rng=[{rng}],\n"
                f"    [ {polys} ]  )")

    def __str__(self) -> str:
        return self.text()


def patch_from_function(f: ExpressionFunction, domain: BoxDomain,
                        sweeper: Sweeper = DEFAULT_SWEEPER) -> VectorFunctionPatch:
    """Validated patch of ``f`` on ``domain`` by evaluation over identity patches."""
    if f.argument_count != domain.dimension:
        raise ShapeError("function argument count differs from domain dimension")
    ids = FunctionPatch.identity(domain, sweeper).components
    values = f.evaluate(ids)
    out = []
    for v in values:
        if not isinstance(v, FunctionPatch):
            v = FunctionPatch.constant(domain, v, sweeper)
        out.append(v)
    return VectorFunctionPatch(out)


__all__ = [
    "Expr", "ExpressionFunction", "BoxDomain", "ScalingMap", "FunctionPatch",
    "VectorFunctionPatch", "patch_from_function", "constant", "coordinate", "exp", "log",
    "sin", "cos", "tan", "atan", "sqrt", "rec", "sqr", "hlf", "abs_", "max_", "min_",
    "differentiate", "substitute", "format_expr",
]

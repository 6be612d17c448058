"""Validated solvers for f(y)=0 and parameterised equations f(x,h(x))=0.

Box solvers use the interval Newton operator

    N(f, Y, y) = y - [Df(Y)]^-1 f(y)

or the Krawczyk operator, iterated as Y <- C(f, Y) ∩ Y.  A step whose
result lies strictly inside its input certifies a unique root.  The
functional solvers (:func:`implicit`, :func:`crossing_time`) run the same
Newton iteration over function patches.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import (
    DomainError,
    NoConvergenceError,
    NoSolutionError,
    PartialResultError,
    SingularMatrixError,
    UnknownSolutionError,
)
from .function import BoxDomain, ExpressionFunction, FunctionPatch, VectorFunctionPatch
from .linalg import Matrix, gauss_solve, interval_gauss_solve, midpoint_inverse
from .numerics import Bounds, add_up, coerce_bounds, format_bounds, format_bounds_compact, mul_up, sub_down
from .taylor_model import DEFAULT_SWEEPER, Sweeper, UnitTaylorModel

Box = list  # list[Bounds]

# relative margin added when inflating a functional Newton iterate
INFLATION = 2.0**-30


@dataclass(frozen=True)
class SolverConfig:
    """Solver settings.

    Attributes:
        tolerance: target width of a solution box.
        max_steps: iteration limit for a single solve or implicit solve.
        method: "newton" or "krawczyk" contractor.
        max_depth: bisection depth limit for :func:`solve_all`.
        newton_fraction: :func:`solve_all` tries contraction once every box
            side is below this fraction of the domain side.
    """

    tolerance: float = 1e-12
    max_steps: int = 32
    method: str = "newton"
    max_depth: int = 40
    newton_fraction: float = 0.1

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")
        if self.method not in ("newton", "krawczyk"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.max_depth < 0:
            raise ValueError("max_depth must be nonnegative")


@dataclass(frozen=True)
class SolutionBox:
    """Box enclosing a root; ``unique`` when a contraction certified uniqueness."""

    box: tuple[Bounds, ...]
    unique: bool

    def __post_init__(self):
        if not self.box:
            raise ValueError("a solution box must be nonempty")

    @property
    def width(self) -> float:
        return max(b.width() for b in self.box)

    def contains(self, point: Sequence) -> bool:
        return all(b.contains(p) for b, p in zip(self.box, point))

    def to_json(self) -> dict:
        return {"box": [[b.lower, b.upper] for b in self.box], "unique": self.unique}

    def text(self) -> str:
        return "[" + ", ".join(format_bounds_compact(b) for b in self.box) + "]"

    def __str__(self) -> str:
        return self.text()


def _as_box(D) -> Box:
    if isinstance(D, BoxDomain):
        return D.bounds()
    out = []
    for d in D:
        if isinstance(d, Bounds):
            out.append(d)
        elif isinstance(d, (tuple, list)):
            out.append(coerce_bounds(d[0]).hull(coerce_bounds(d[1])))
        else:
            out.append(coerce_bounds(d))
    return out


def _check_square(f: ExpressionFunction, n: int) -> None:
    if f.argument_count != n or f.result_count != n:
        raise ValueError(f"expected a square system in {n} variables, got "
                         f"{f.argument_count} arguments and {f.result_count} results")


def _midpoint(box: Box) -> list[Bounds]:
    return [Bounds(b.mid()) for b in box]


def _width(box: Box) -> float:
    return max(b.width() for b in box)


def _strictly_inside(inner: Box, outer: Box) -> bool:
    return all(o.lower < i.lower and i.upper < o.upper for i, o in zip(inner, outer))


def _intersect(a: Box, b: Box) -> Box | None:
    out = []
    for x, y in zip(a, b):
        z = x.intersection(y)
        if z is None:
            return None
        out.append(z)
    return out


# ---------------------------------------------------------------------------
# Contractors
# ---------------------------------------------------------------------------


def newton_step(f: ExpressionFunction, box: Sequence, point: Sequence | None = None) -> Box | None:
    """One interval Newton step; None when the Jacobian solve meets a singular pivot.

    Args:
        f: square system.
        box: current enclosure Y.
        point: approximation y in Y (midpoint by default).
    """
    Y = _as_box(box)
    _check_square(f, len(Y))
    y = _midpoint(Y) if point is None else [coerce_bounds(p) for p in point]
    fy = f.evaluate(y)
    J = f.jacobian(Y)
    try:
        delta = interval_gauss_solve(J, fy)
    except SingularMatrixError:
        return None
    return [a - d for a, d in zip(y, delta)]


def krawczyk_step(f: ExpressionFunction, box: Sequence, point: Sequence | None = None,
                  inverse: Matrix | Sequence[Sequence] | None = None) -> Box:
    """One Krawczyk step  y - C f(y) + (I - C Df(Y))(Y - y).

    ``inverse`` is the preconditioner C, by default the float inverse of the
    midpoint Jacobian.
    """
    Y = _as_box(box)
    n = len(Y)
    _check_square(f, n)
    y = _midpoint(Y) if point is None else [coerce_bounds(p) for p in point]
    J = f.jacobian(Y)
    if inverse is None:
        C = midpoint_inverse(J).entries
    else:
        C = inverse.entries if isinstance(inverse, Matrix) else [list(r) for r in inverse]
    C = [[coerce_bounds(c) for c in row] for row in C]
    fy = f.evaluate(y)
    diff = [Yi - yi for Yi, yi in zip(Y, y)]
    out = []
    for i in range(n):
        acc = y[i]
        for k in range(n):
            acc = acc - C[i][k] * fy[k]
        for j in range(n):
            m = Bounds(1.0 if i == j else 0.0)
            for k in range(n):
                m = m - C[i][k] * J[k][j]
            acc = acc + m * diff[j]
        out.append(acc)
    return out


def _contract(f: ExpressionFunction, box: Box, method: str) -> Box | None:
    if method == "krawczyk":
        try:
            return krawczyk_step(f, box)
        except SingularMatrixError:
            return None
    return newton_step(f, box)


# ---------------------------------------------------------------------------
# Box solvers
# ---------------------------------------------------------------------------


def solve(f: ExpressionFunction, domain, config: SolverConfig = SolverConfig()) -> SolutionBox:
    """Iterate Y <- C(f,Y) ∩ Y to a box of width at most the tolerance.

    Raises:
        NoSolutionError: an intersection became empty, so f has no root in the domain.
        NoConvergenceError: the step limit was reached without both meeting the
            tolerance and certifying uniqueness.
    """
    box = _as_box(domain)
    _check_square(f, len(box))
    unique = False
    for _ in range(config.max_steps):
        new = _contract(f, box, config.method)
        if new is None and config.method == "newton":
            new = _contract(f, box, "krawczyk")
        if new is None:
            if _excludes_zero(f, box):
                raise NoSolutionError("no solution in the box: f excludes zero on it")
            raise NoConvergenceError("contraction failed: the Jacobian may be singular")
        if _strictly_inside(new, box):
            unique = True
        nxt = _intersect(new, box)
        if nxt is None:
            raise NoSolutionError("no solution in the box: contraction is disjoint from it")
        stalled = nxt == box
        box = nxt
        if unique and (_width(box) <= config.tolerance or stalled):
            return SolutionBox(tuple(box), True)
        if stalled and not unique:
            break
    if unique:
        return SolutionBox(tuple(box), True)
    raise NoConvergenceError(f"no certified solution after {config.max_steps} steps")


def _try_contract(f: ExpressionFunction, box: Box, config: SolverConfig):
    """Classify a small box: ("none", None), ("solution", SolutionBox) or ("open", box)."""
    current = box
    for _ in range(6):
        try:
            new = _contract(f, current, config.method)
        except DomainError:
            return "open", current
        if new is None:
            return "open", current
        nxt = _intersect(new, current)
        if nxt is None:
            return "none", None
        if _strictly_inside(new, current):
            try:
                return "solution", solve(f, nxt, config)
            except NoSolutionError:
                return "none", None
            except NoConvergenceError:
                return "open", nxt
        if _width(nxt) > 0.5 * _width(current):
            return "open", nxt
        current = nxt
    return "open", current


def _solve_inflated(f: ExpressionFunction, box: Box, config: SolverConfig) -> SolutionBox | None:
    """Certified root near a tiny box, by solving on a slightly enlarged box.

    Bisection can land exactly on a root, leaving degenerate boxes that no
    contraction maps strictly inside themselves.  A unique root in the
    enlarged box accounts for every root in ``box``.
    """
    grown = []
    for b in box:
        r = add_up(b.width(), config.tolerance)
        grown.append(Bounds(sub_down(b.lower, r), add_up(b.upper, r)))
    try:
        found = solve(f, grown, config)
    except (NoSolutionError, NoConvergenceError, DomainError):
        return None
    return found if found.unique else None


def _excludes_zero(f: ExpressionFunction, box: Box) -> bool:
    try:
        values = f.evaluate(box)
    except DomainError:
        return False
    return any(v.lower > 0 or v.upper < 0 for v in values)


def _merge(solutions: list[SolutionBox], f: ExpressionFunction, config: SolverConfig) -> list[SolutionBox]:
    """Hull overlapping or nearly touching boxes; re-certify merged hulls."""
    sols = list(solutions)
    merged = True
    while merged:
        merged = False
        for i in range(len(sols)):
            for j in range(i + 1, len(sols)):
                a, b = sols[i].box, sols[j].box
                if all(x.lower <= y.upper + config.tolerance and y.lower <= x.upper + config.tolerance
                       for x, y in zip(a, b)):
                    hull = [x.hull(y) for x, y in zip(a, b)]
                    try:
                        s = solve(f, hull, config)
                    except (NoConvergenceError, NoSolutionError):
                        s = _solve_inflated(f, hull, config) or SolutionBox(tuple(hull), False)
                    sols[i] = s
                    del sols[j]
                    merged = True
                    break
            if merged:
                break
    return sols


def solve_all(f: ExpressionFunction, domain, config: SolverConfig = SolverConfig()) -> list[SolutionBox]:
    """All roots of f in the domain by branch-and-prune.

    Boxes whose image excludes zero are pruned; boxes small relative to the
    domain are contracted; the rest are bisected along the widest side.

    Raises:
        PartialResultError: the depth limit left boxes that were neither
            pruned nor certified; carries both lists.
    """
    D = _as_box(domain)
    _check_square(f, len(D))
    limits = [config.newton_fraction * d.width() for d in D]
    solutions: list[SolutionBox] = []
    unresolved: list[tuple[Bounds, ...]] = []
    stack: list[tuple[Box, int]] = [(D, 0)]
    while stack:
        box, depth = stack.pop()
        if _excludes_zero(f, box):
            continue
        if all(b.width() <= lim for b, lim in zip(box, limits)):
            status, result = _try_contract(f, box, config)
            if status == "none":
                continue
            if status == "solution":
                solutions.append(result)
                continue
            box = result
        if depth >= config.max_depth or _width(box) <= config.tolerance:
            found = _solve_inflated(f, box, config)
            if found is None:
                unresolved.append(tuple(box))
            else:
                solutions.append(found)
            continue
        j = max(range(len(box)), key=lambda k: box[k].width())
        lo, hi = box[j].split()
        left, right = list(box), list(box)
        left[j], right[j] = lo, hi
        stack.append((right, depth + 1))
        stack.append((left, depth + 1))
    solutions = _merge(solutions, f, config)
    solutions.sort(key=lambda s: [b.lower for b in s.box])
    if unresolved:
        raise PartialResultError(
            f"{len(unresolved)} boxes unresolved at the depth limit", solutions, unresolved)
    return solutions


# ---------------------------------------------------------------------------
# Functional solvers over patches
# ---------------------------------------------------------------------------


def _patch_pivot_key(p):
    r = p.range() if isinstance(p, FunctionPatch) else coerce_bounds(p)
    return r.mig(), abs(r.mid())


def _functional_newton(F_mid: list, J: list[list], h_mid: VectorFunctionPatch) -> VectorFunctionPatch:
    delta = gauss_solve(J, F_mid, _patch_pivot_key)
    return VectorFunctionPatch([hm - d for hm, d in zip(h_mid.components, delta)])


def _restart_box(new_ranges: Sequence[Bounds], old_ranges: Sequence[Bounds],
                 limits: Sequence[Bounds]) -> list[Bounds] | None:
    """Hull-restart box: pointwise every solution lies in all three boxes."""
    out = []
    for a, b, c in zip(new_ranges, old_ranges, limits):
        r = a.intersection(b)
        r = None if r is None else r.intersection(c)
        if r is None:
            return None
        out.append(r)
    return out


def implicit(f: ExpressionFunction, parameters: BoxDomain, candidate, config: SolverConfig = SolverConfig(),
             sweeper: Sweeper = DEFAULT_SWEEPER) -> VectorFunctionPatch:
    """Patch h on the parameter box with f(x, h(x)) = 0.

    Runs the functional Newton iteration h <- h_mid - [D2 f(x, h)]^-1 f(x, h_mid)
    from the constant patch equal to the candidate box.  A step that strictly
    refines its input certifies existence and uniqueness of the solution
    through every enclosed point; further steps then tighten the patch.
    Before that, a non-refining step restarts from the constant patch on the
    intersection of the old and new ranges.  Once such restarts stop
    shrinking the ranges, the next start is the latest iterate with its
    error bounds inflated, so that solutions varying with x can be captured.

    Args:
        f: system of m equations in n parameters followed by m unknowns.
        parameters: box X for the parameters.
        candidate: box Y for the unknowns.

    Raises:
        UnknownSolutionError: no refining step within ``config.max_steps``,
            a possibly singular Jacobian, or an empty restart box.
    """
    X = parameters if isinstance(parameters, BoxDomain) else BoxDomain(parameters)
    Y = _as_box(candidate)
    n, m = X.dimension, len(Y)
    if f.argument_count != n + m or f.result_count != m:
        raise ValueError(f"expected {m} equations in {n}+{m} arguments")
    ids = FunctionPatch.identity(X, sweeper).components
    h = VectorFunctionPatch([FunctionPatch.constant(X, y, sweeper) for y in Y])
    jac = [[f[i].derivative(n + j) for j in range(m)] for i in range(m)]
    validated = False
    for _ in range(config.max_steps):
        try:
            h_mid = h.midpoint()
            F_mid = f.evaluate(ids + h_mid.components)
            J = [[jac[i][j].evaluate(ids + h.components)[0] for j in range(m)] for i in range(m)]
            new = _functional_newton(F_mid, J, h_mid)
        except (SingularMatrixError, DomainError) as exc:
            if validated:
                break
            raise UnknownSolutionError(f"implicit solve failed: {exc}") from exc
        if new.refines(h, strict=not validated):
            gain = max(new.errors) <= 0.9 * max(h.errors)
            h = new
            if validated and not gain:
                break
            validated = True
        elif validated:
            break
        else:
            old_ranges = h.range()
            box = _restart_box(new.range(), old_ranges, Y)
            if box is None:
                raise UnknownSolutionError("no solution in the candidate box")
            if all(b.width() > 0.9 * r.width() for b, r in zip(box, old_ranges)):
                # constant restarts have stalled; retry from the inflated iterate
                h = _inflate(new)
            else:
                h = VectorFunctionPatch([FunctionPatch.constant(X, b, sweeper) for b in box])
    if not validated:
        raise UnknownSolutionError(f"no refinement within {config.max_steps} steps")
    return h


def _inflate(h: VectorFunctionPatch) -> VectorFunctionPatch:
    """Double each error bound and add a small absolute margin."""
    out = []
    for c in h.components:
        m = c.model
        err = add_up(mul_up(2.0, m.error), mul_up(INFLATION, add_up(1.0, m.norm())))
        out.append(c._wrap(UnitTaylorModel(m.argument_count, dict(m.coefficients), err, m.sweeper)))
    return VectorFunctionPatch(out)


def crossing_time(field: ExpressionFunction, guard: ExpressionFunction, flow: VectorFunctionPatch,
                  config: SolverConfig = SolverConfig()) -> FunctionPatch:
    """Time gamma(x) at which the flow from x meets the guard set g = 0.

    ``flow`` is a patch on X x [t0:t1] (time last).  Iterates
    gamma <- gamma_mid - g(flow(x, gamma_mid)) / (Lf g)(flow(x, gamma))
    where Lf g is the Lie derivative of g along the field, restarting from
    constant patches like :func:`implicit` until a step refines.

    Raises:
        UnknownSolutionError: no refinement, or the Lie derivative may vanish.
        DomainError: an iterate leaves the flow's time domain.
    """
    dom = flow.domain
    n = dom.dimension - 1
    if field.argument_count != n or field.result_count != n or guard.argument_count != n:
        raise ValueError("field, guard and flow dimensions do not match")
    X = BoxDomain(dom.intervals[:n])
    T = dom[n]
    sweeper = flow[0].sweeper
    ids = FunctionPatch.identity(X, sweeper).components
    lie = guard.lie_derivative(field)
    gamma = FunctionPatch.constant(X, T, sweeper)
    validated = False
    for _ in range(config.max_steps):
        g_mid = gamma.midpoint()
        states_mid = flow.compose(ids + [g_mid])
        states = flow.compose(ids + [gamma])
        num = guard.evaluate(states_mid.components)[0]
        try:
            den = lie.evaluate(states.components)[0]
            new = g_mid - num / den
        except DomainError as exc:
            if validated:
                break
            raise UnknownSolutionError(f"crossing is not transversal: {exc}") from exc
        if new.refines(gamma, strict=not validated):
            gain = new.error <= 0.9 * gamma.error
            gamma = new
            if validated and not gain:
                break
            validated = True
        elif validated:
            break
        else:
            box = _restart_box([new.range()], [gamma.range()], [T])
            if box is None:
                raise UnknownSolutionError("the guard is not crossed within the time domain")
            if box[0] == gamma.range():
                raise UnknownSolutionError("crossing-time iteration stalled")
            gamma = FunctionPatch.constant(X, box[0], sweeper)
    if not validated:
        raise UnknownSolutionError(f"no refinement within {config.max_steps} steps")
    return gamma


def format_solutions(solutions: Sequence[SolutionBox], compact: bool = True) -> str:
    fmt = format_bounds_compact if compact else format_bounds
    return "[ " + ", ".join("[" + ", ".join(fmt(b) for b in s.box) + "]" for s in solutions) + " ]"

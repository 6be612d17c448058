"""Validated flow steps for autonomous ODEs y' = f(y).

A step first certifies a bound B: every solution starting in D stays in B
for times in [0,h].  The flow on D x [0,h] is then enclosed by a function
patch, either by Picard iteration over patches or by a Taylor expansion
with explicit remainder terms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .differential import Differential, PowerSeries
from .errors import DomainError, IntegrationError, NoBoundError, ValcalcError
from .function import BoxDomain, ExpressionFunction, FunctionPatch, VectorFunctionPatch
from .multiindex import indices_up_to
from .numerics import Bounds, add_up, coerce_bounds, mul_up
from .taylor_model import Sweeper, UnitTaylorModel, threshold_sweeper

MINIMUM_STEP_FRACTION = 2.0**-20
SWEEP_FRACTION = 2.0**-10


@dataclass(frozen=True)
class IntegratorConfig:
    """Integrator settings.

    Attributes:
        tolerance: target model error per step; larger errors halve the step.
        kind: "picard" or "taylor".
        max_iterations: Picard iteration limit.
        order: temporal order n of the Taylor integrator.
        spatial_order: spatial degree m of the Taylor integrator.
        bound_refinements: refinement passes applied to a certified bound.
        sweeper: sweeping policy for the patches; by default a threshold
            sweeper at tolerance * 2^-10.
    """

    tolerance: float = 1e-3
    kind: str = "picard"
    max_iterations: int = 12
    order: int = 8
    spatial_order: int = 6
    bound_refinements: int = 2
    sweeper: Sweeper | None = None

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.kind not in ("picard", "taylor"):
            raise ValueError(f"unknown integrator {self.kind!r}")
        if self.max_iterations < 1 or self.order < 1 or self.spatial_order < 1:
            raise ValueError("iteration counts and orders must be positive")
        if self.bound_refinements < 0:
            raise ValueError("bound_refinements must be nonnegative")
        if self.sweeper is None:
            object.__setattr__(self, "sweeper", threshold_sweeper(self.tolerance * SWEEP_FRACTION))


@dataclass(frozen=True)
class FlowBound:
    """Box B with D + [0,h] f(B) ⊆ B, certified at construction."""

    box: tuple[Bounds, ...]
    step: float


@dataclass
class FlowStep:
    """One integration step on local time [0, step] starting at global ``t0``."""

    t0: float
    step: float
    patch: VectorFunctionPatch

    @property
    def t1(self) -> float:
        return self.t0 + self.step

    def final_box(self) -> list[Bounds]:
        n = self.patch.domain.dimension - 1
        return self.patch.partial_evaluate(n, self.step).range()

    def to_json(self) -> dict:
        return {"t0": self.t0, "t1": self.t1, "patch": self.patch.to_json()}


def _box(D) -> list[Bounds]:
    if isinstance(D, BoxDomain):
        return D.bounds()
    out = []
    for d in D:
        if isinstance(d, (tuple, list)):
            out.append(coerce_bounds(d[0]).hull(coerce_bounds(d[1])))
        else:
            out.append(coerce_bounds(d))
    return out


def _check_field(f: ExpressionFunction, n: int) -> None:
    if f.argument_count != n or f.result_count != n:
        raise ValueError(f"vector field must map R^{n} to R^{n}")


def _euler_box(D: Sequence[Bounds], f: ExpressionFunction, B: Sequence[Bounds], h: float) -> list[Bounds] | None:
    """D + [0,h] f(B), or None if f cannot be evaluated on B."""
    try:
        fB = f.evaluate(list(B))
    except (DomainError, ArithmeticError):
        return None
    H = Bounds(0.0, h)
    return [d + H * v for d, v in zip(D, fB)]


def certifies(f: ExpressionFunction, D: Sequence, B: Sequence[Bounds], h: float) -> bool:
    """Interval check of the bound property D + [0,h] f(B) ⊆ B."""
    E = _euler_box(_box(D), f, B, h)
    return E is not None and all(e.refines(b) for e, b in zip(E, B))


def find_bound(f: ExpressionFunction, D, h: float, refinements: int = 2) -> FlowBound:
    """Certified bound for the flow of f from D, halving h until one is found.

    Starts from B0 = D' + [0,2h] f(D') with D' the box D doubled about its
    centre, then applies ``refinements`` passes of B <- D + [0,h] f(B).

    Raises:
        NoBoundError: h dropped below 2^-20 of the requested step.
    """
    Dbox = _box(D)
    _check_field(f, len(Dbox))
    if not h > 0:
        raise ValueError("step must be positive")
    minimum = h * MINIMUM_STEP_FRACTION
    while h >= minimum:
        wide = []
        for d in Dbox:
            c = Bounds(d.mid())
            wide.append(c + (d - c) * 2)
        B = _euler_box(wide, f, wide, 2 * h)
        if B is not None:
            B = [b.hull(d) for b, d in zip(B, wide)]
            if certifies(f, Dbox, B, h):
                for _ in range(refinements):
                    nb = _euler_box(Dbox, f, B, h)
                    if nb is None or not certifies(f, Dbox, nb, h):
                        break
                    B = nb
                return FlowBound(tuple(B), h)
        h = h / 2
    raise NoBoundError(f"no bound found for steps down to {minimum}")


def _flow_domain(D: Sequence[Bounds], h: float) -> BoxDomain:
    return BoxDomain([(d.lower, d.upper) for d in D] + [(0.0, h)])


def picard_flow_step(f: ExpressionFunction, D, h: float, bound: FlowBound,
                     config: IntegratorConfig = IntegratorConfig()) -> VectorFunctionPatch:
    """Enclose the flow on D x [0,h] by Picard iteration over patches.

    Starts from the constant patch B, which contains the flow because B is a
    bound; each iterate x + int_0^t f(phi(x,s)) ds still contains it.
    Iteration stops when the error no longer shrinks by 10%.

    Raises:
        IntegrationError: no iterate refined its predecessor.
    """
    Dbox = _box(D)
    n = len(Dbox)
    _check_field(f, n)
    dom = _flow_domain(Dbox, h)
    sw = config.sweeper
    xs = [FunctionPatch.coordinate(dom, i, sw) for i in range(n)]
    phi = VectorFunctionPatch([FunctionPatch.constant(dom, b, sw) for b in bound.box])
    refined = False
    for _ in range(config.max_iterations):
        try:
            derivs = f.evaluate(phi.components)
        except DomainError as exc:
            raise IntegrationError(f"field evaluation failed: {exc}") from exc
        new_components = []
        for x, g in zip(xs, derivs):
            if not isinstance(g, FunctionPatch):
                g = FunctionPatch.constant(dom, g, sw)
            integral = g.antidifferentiate(n)
            at_zero = FunctionPatch(dom, integral.model.partial_evaluate(n, Bounds(-1.0)))
            new_components.append(x + (integral - at_zero))
        new = VectorFunctionPatch(new_components)
        if new.refines(phi):
            refined = True
        shrinking = max(new.errors) <= 0.9 * max(phi.errors)
        phi = new
        if refined and not shrinking:
            break
    if not refined:
        raise IntegrationError("Picard iteration did not refine the bound")
    return phi


def _series_coefficients(f: ExpressionFunction, initial: list, order: int) -> list[list]:
    """Time Taylor coefficients y_0..y_order of the solution through ``initial``.

    Uses y_{k+1} = (f(y))_k / (k+1) on truncated power series.
    """
    n = len(initial)
    ys = [[y] for y in initial]
    for k in range(order):
        series = [PowerSeries(ys[i], k) for i in range(n)]
        values = f.evaluate(series)
        for i in range(n):
            v = values[i]
            c = v.coeffs[k] if isinstance(v, PowerSeries) else (v if k == 0 else v * 0)
            ys[i].append(c / (k + 1))
    return ys


def taylor_flow_step(f: ExpressionFunction, D, h: float, bound: FlowBound,
                     config: IntegratorConfig = IntegratorConfig()) -> VectorFunctionPatch:
    """Enclose the flow by its space-time Taylor expansion about (centre, 0).

    With spatial degree m and temporal order n the enclosure is
    sum c_{a,k} xi^a t^k over |a| <= m, k < n, plus the pure time term of
    order n, where xi = x - centre.  Remainders come from coefficients
    C_{a,k} over D (|a| = m) and the order-n time coefficient over B.

    Raises:
        IntegrationError: a coefficient is not finite.
    """
    Dbox = _box(D)
    n_state = len(Dbox)
    _check_field(f, n_state)
    m, order = config.spatial_order, config.order
    centre = [Bounds(d.mid()) for d in Dbox]
    radii = [max(d.upper - d.mid(), d.mid() - d.lower) for d in Dbox]
    active = [i for i in range(n_state) if radii[i] > 0]
    s = len(active)

    def lift(values, deg):
        if s == 0:
            return [Differential.constant(v, 0, 0) for v in values]
        out = []
        for i, v in enumerate(values):
            if i in active:
                out.append(Differential.variable(active.index(i), v, s, deg))
            else:
                out.append(Differential.constant(v, s, deg))
        return out

    deg = m if s else 0
    try:
        c_series = _series_coefficients(f, lift(centre, deg), order)
        C_series = _series_coefficients(f, lift(Dbox, deg), order - 1) if s else None
        B_series = _series_coefficients(f, list(bound.box), order)
    except (DomainError, ArithmeticError) as exc:
        raise IntegrationError(f"series evaluation failed: {exc}") from exc

    hb = Bounds(h)
    rad_b = [Bounds(r) for r in radii]
    dom = _flow_domain(Dbox, h)
    nvars = n_state + 1
    sw = config.sweeper
    # xi_i = r_i z_i and t = (h/2)(1 + z_t) in unit coordinates.
    xi = [UnitTaylorModel.variable(nvars, i, sw).scale(rad_b[i]) for i in active]
    t_model = (UnitTaylorModel.variable(nvars, n_state, sw) + 1.0).scale(hb.hlf())

    components = []
    for i in range(n_state):
        poly = UnitTaylorModel.zero(nvars, sw)
        error = 0.0
        t_pow = UnitTaylorModel.constant(nvars, 1.0, sw)
        h_pow = Bounds(1.0)
        for k in range(order + 1):
            coeff_k = c_series[i][k]
            if k == order:
                # Pure time remainder: t^n times the order-n coefficient over B.
                c0 = coeff_k.value if isinstance(coeff_k, Differential) else coeff_k
                mid = Bounds(c0.mid())
                rem = (B_series[i][order] - mid).mag()
                poly = poly + t_pow.scale(mid)
                error = add_up(error, mul_up(rem, h_pow.upper))
                break
            for alpha, c in _terms(coeff_k, s):
                mid = Bounds(c.mid())
                monomial = t_pow
                r_pow = Bounds(1.0)
                for j, e in enumerate(alpha):
                    if e:
                        monomial = monomial * xi[j].pow(e)
                        r_pow = r_pow * rad_b[active[j]].pow(e)
                weight = (r_pow * h_pow).upper
                if sum(alpha) == m and s:
                    C = C_series[i][k][alpha]
                    dev = (coerce_bounds(C) - mid).mag()
                else:
                    dev = (c - mid).mag()
                if not math.isfinite(dev):
                    raise IntegrationError("non-finite Taylor coefficient")
                poly = poly + monomial.scale(mid)
                error = add_up(error, mul_up(dev, weight))
            if s:
                # Degree-m indices absent at the centre still carry remainders.
                present = set(a for a, _ in _terms(coeff_k, s))
                for alpha in indices_up_to(s, m):
                    if sum(alpha) != m or alpha in present:
                        continue
                    C = C_series[i][k][alpha]
                    r_pow = Bounds(1.0)
                    for j, e in enumerate(alpha):
                        r_pow = r_pow * rad_b[active[j]].pow(e)
                    error = add_up(error, mul_up(coerce_bounds(C).mag(), (r_pow * h_pow).upper))
            t_pow = t_pow * t_model
            h_pow = h_pow * hb
        model = UnitTaylorModel(nvars, dict(poly.coefficients), add_up(poly.error, error), sw).sweep()
        components.append(FunctionPatch(dom, model))
    return VectorFunctionPatch(components)


def _terms(value, s: int):
    """(alpha, Bounds coefficient) pairs of a Differential or scalar."""
    if isinstance(value, Differential):
        for alpha, c in value.coefficients.items():
            yield alpha, coerce_bounds(c)
    else:
        yield (0,) * s, coerce_bounds(value)


def flow_step(f: ExpressionFunction, D, h: float, config: IntegratorConfig = IntegratorConfig()) -> VectorFunctionPatch:
    """Bound, then enclose the flow; halves h while the error exceeds the tolerance."""
    Dbox = _box(D)
    bound = find_bound(f, Dbox, h, config.bound_refinements)
    step = bound.step
    minimum = h * MINIMUM_STEP_FRACTION
    method = picard_flow_step if config.kind == "picard" else taylor_flow_step
    while True:
        patch = method(f, Dbox, step, FlowBound(bound.box, step), config)
        if max(patch.errors) <= config.tolerance or step / 2 < minimum:
            return patch
        step = step / 2


def flow(f: ExpressionFunction, initial, total_time: float, config: IntegratorConfig = IntegratorConfig(),
         max_step: float | None = None) -> list[FlowStep]:
    """Integrate from the initial box over [0, total_time] in validated steps.

    The next initial box is the range of each patch at its final time.

    Raises:
        IntegrationError: a step failed; ``step_index`` records which.
    """
    if not total_time > 0:
        raise ValueError("total time must be positive")
    box = _box(initial)
    _check_field(f, len(box))
    steps: list[FlowStep] = []
    t = 0.0
    while t < total_time:
        request = total_time - t
        if max_step is not None:
            request = min(request, max_step)
        try:
            patch = flow_step(f, box, request, config)
        except IntegrationError as exc:
            raise IntegrationError(f"step {len(steps)} at t={t}: {exc}", len(steps)) from exc
        except ValcalcError as exc:
            raise IntegrationError(f"step {len(steps)} at t={t}: {exc}", len(steps)) from exc
        h = patch.domain.intervals[-1][1]
        record = FlowStep(t, h, patch)
        steps.append(record)
        box = record.final_box()
        t = t + h
    return steps


__all__ = [
    "IntegratorConfig", "FlowBound", "FlowStep", "find_bound", "certifies", "picard_flow_step",
    "taylor_flow_step", "flow_step", "flow",
]

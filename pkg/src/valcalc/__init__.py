"""Validated numerics: rounded bounds, Taylor models, function patches,
interval solvers and flow integrators."""

from __future__ import annotations

from .errors import (
    DomainError,
    IntegrationError,
    NoBoundError,
    NoConvergenceError,
    NoSolutionError,
    NumericalError,
    ParseError,
    PartialResultError,
    ShapeError,
    SingularMatrixError,
    SolverError,
    UnknownSolutionError,
    ValcalcError,
)
from .function import BoxDomain, ExpressionFunction, FunctionPatch, VectorFunctionPatch, patch_from_function
from .integrators import FlowStep, IntegratorConfig, find_bound, flow, flow_step
from .numerics import Bounds
from .parser import parse_box, parse_expression, parse_function
from .solvers import SolutionBox, SolverConfig, crossing_time, implicit, solve, solve_all

__version__ = "0.1.0"

__all__ = [
    "Bounds", "BoxDomain", "DomainError", "ExpressionFunction", "FlowStep", "FunctionPatch",
    "IntegrationError", "IntegratorConfig", "NoBoundError", "NoConvergenceError", "NoSolutionError",
    "NumericalError", "ParseError", "PartialResultError", "ShapeError", "SingularMatrixError",
    "SolutionBox", "SolverConfig", "SolverError", "UnknownSolutionError", "ValcalcError",
    "VectorFunctionPatch", "crossing_time", "find_bound", "flow", "flow_step", "implicit",
    "parse_box", "parse_expression", "parse_function", "patch_from_function", "solve", "solve_all",
]

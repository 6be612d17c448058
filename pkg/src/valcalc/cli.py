"""Command-line front end: solve, solve-all, implicit and flow.

A problem is given as a file of ``key = value`` lines, as flags, or both;
flags override the file.  Example file for the equilibria of a planar
system::

    command = solve-all
    variables = v, w
    let R = 0.1
    f = v - v^3/3 - w + R*3.5
    f = (v + 0.7 - 2*w)/12.5
    domain = [-2:3]x[-1:2]
    tolerance = 1e-12

Each ``f`` line adds one expression.  ``let NAME = EXPR`` defines a
constant usable in later expressions.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass, field
from typing import Sequence

from .errors import (
    IntegrationError,
    NoConvergenceError,
    NoSolutionError,
    ParseError,
    PartialResultError,
    UnknownSolutionError,
    ValcalcError,
)
from .function import BoxDomain, ExpressionFunction
from .integrators import IntegratorConfig, flow
from .numerics import Bounds, format_bounds_compact
from .parser import parse_box, parse_decimal, parse_expression, parse_names
from .solvers import SolutionBox, SolverConfig, implicit, solve, solve_all
from .taylor_model import threshold_sweeper

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NO_SOLUTION = 2
EXIT_PARTIAL = 3
EXIT_UNKNOWN_SOLUTION = 4
EXIT_INTEGRATION_FAILURE = 5

COMMANDS = ("solve", "solve-all", "implicit", "flow")
_NUMBER_KEYS = {"tolerance": float, "max_steps": int, "order": int, "spatial_order": int,
                "step": str, "time": str, "sweep_threshold": float, "samples": int}
_KNOWN_KEYS = {"command", "variables", "parameters", "f", "domain", "parameter_domain", "initial",
               "integrator", "format", "let"} | set(_NUMBER_KEYS)


@dataclass
class ProblemSpec:
    """Parsed problem: names, expression sources and options."""

    command: str | None = None
    variables: list[str] = field(default_factory=list)
    parameters: list[str] = field(default_factory=list)
    expressions: list[tuple[str, int, int]] = field(default_factory=list)
    constants: dict[str, object] = field(default_factory=dict)
    options: dict[str, object] = field(default_factory=dict)

    def option(self, key: str, default=None):
        return self.options.get(key, default)


def parse_problem(text: str) -> ProblemSpec:
    """Parse the ``key = value`` problem format.

    Raises:
        ParseError: with the line and column of the offending text.
    """
    spec = ProblemSpec()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        stripped = line.strip()
        if stripped.startswith("let "):
            body = stripped[4:]
            if "=" not in body:
                raise ParseError("expected 'let NAME = EXPR'", lineno, 1)
            name, expr_text = body.split("=", 1)
            name = name.strip()
            if not name.isidentifier():
                raise ParseError(f"invalid constant name {name!r}", lineno, 5)
            col = line.index("=", line.index("let") + 3) + 2
            spec.constants[name] = parse_expression(expr_text, [], spec.constants, lineno, col)
            continue
        if "=" not in line:
            raise ParseError("expected 'key = value'", lineno, len(line) - len(line.lstrip()) + 1)
        key, value = line.split("=", 1)
        key = key.strip().replace("-", "_")
        col = line.index("=") + 2 + (len(value) - len(value.lstrip()))
        value = value.strip()
        if key not in _KNOWN_KEYS:
            raise ParseError(f"unknown key {key!r}", lineno, len(line) - len(line.lstrip()) + 1)
        _apply_option(spec, key, value, lineno, col)
    return spec


def _apply_option(spec: ProblemSpec, key: str, value: str, line: int | None, col: int | None) -> None:
    if key == "command":
        if value not in COMMANDS:
            raise ParseError(f"unknown command {value!r}", line, col)
        spec.command = value
    elif key == "variables":
        spec.variables = parse_names(value, line)
    elif key == "parameters":
        spec.parameters = parse_names(value, line)
    elif key == "f":
        spec.expressions.append((value, line or 1, col or 1))
    elif key in ("domain", "parameter_domain", "initial"):
        spec.options[key] = parse_box(value, line)
    elif key in ("integrator", "format"):
        spec.options[key] = value
    elif key in _NUMBER_KEYS:
        kind = _NUMBER_KEYS[key]
        try:
            spec.options[key] = parse_decimal(value) if kind is str else kind(value)
        except (ValueError, ParseError):
            raise ParseError(f"invalid value {value!r} for {key}", line, col) from None
    else:
        raise ParseError(f"unknown key {key!r}", line, col)


def build_function(spec: ProblemSpec, names: Sequence[str]) -> ExpressionFunction:
    if not spec.expressions:
        raise ParseError("no expressions given (use 'f = ...')")
    outs = [parse_expression(text, names, spec.constants, line, col) for text, line, col in spec.expressions]
    return ExpressionFunction(len(names), outs, list(names))


def _box_domain(intervals) -> BoxDomain:
    return BoxDomain([(a, b) for a, b in intervals])


def _require(spec: ProblemSpec, key: str):
    v = spec.option(key)
    if v is None:
        raise ParseError(f"missing required option {key!r}")
    return v


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _solver_config(spec: ProblemSpec) -> SolverConfig:
    return SolverConfig(tolerance=float(spec.option("tolerance", 1e-12)),
                        max_steps=int(spec.option("max_steps", 32)))


def _check_dimension(spec: ProblemSpec, box, names: Sequence[str], what: str) -> None:
    if len(box) != len(names):
        raise ParseError(f"{what} has {len(box)} intervals but {len(names)} names were declared")


def _solutions_text(label: str, sols: Sequence[SolutionBox]) -> str:
    if not sols:
        return f"{label}: [ ]"
    rows = ["[" + ",".join(format_bounds_compact(b) for b in s.box) + "]" for s in sols]
    pad = " " * (len(label) + 4)
    return f"{label}: [ " + (",\n" + pad).join(rows) + " ]"


def cmd_solve(spec: ProblemSpec) -> tuple[int, str, dict]:
    names = spec.variables
    box = _require(spec, "domain")
    _check_dimension(spec, box, names, "domain")
    f = build_function(spec, names)
    try:
        sol = solve(f, _box_domain(box), _solver_config(spec))
    except NoSolutionError as exc:
        return EXIT_NO_SOLUTION, f"no solution: {exc}", {"solution": None, "error": str(exc)}
    except NoConvergenceError as exc:
        return EXIT_UNKNOWN_SOLUTION, f"no convergence: {exc}", {"solution": None, "error": str(exc)}
    return EXIT_OK, _solutions_text("solution", [sol]), {"solution": sol.to_json()}


def cmd_solve_all(spec: ProblemSpec) -> tuple[int, str, dict]:
    names = spec.variables
    box = _require(spec, "domain")
    _check_dimension(spec, box, names, "domain")
    f = build_function(spec, names)
    try:
        sols = solve_all(f, _box_domain(box), _solver_config(spec))
    except PartialResultError as exc:
        text = _solutions_text("solutions", exc.solutions) + "\n" + \
            f"unresolved: {len(exc.unresolved)} boxes"
        data = {"solutions": [s.to_json() for s in exc.solutions],
                "unresolved": [[[b.lower, b.upper] for b in u] for u in exc.unresolved]}
        return EXIT_PARTIAL, text, data
    code = EXIT_OK if sols else EXIT_NO_SOLUTION
    return code, _solutions_text("solutions", sols), {"solutions": [s.to_json() for s in sols]}


def cmd_implicit(spec: ProblemSpec) -> tuple[int, str, dict]:
    params, names = spec.parameters, spec.variables
    if not params:
        raise ParseError("implicit needs 'parameters = ...'")
    pdom = _require(spec, "parameter_domain")
    box = _require(spec, "domain")
    _check_dimension(spec, pdom, params, "parameter_domain")
    _check_dimension(spec, box, names, "domain")
    overlap = set(params) & set(names)
    if overlap:
        raise ParseError(f"names declared as both parameters and variables: {sorted(overlap)}")
    f = build_function(spec, list(params) + list(names))
    if f.result_count != len(names):
        raise ParseError(f"implicit needs {len(names)} equations, got {f.result_count}")
    config = _solver_config(spec)
    threshold = spec.option("sweep_threshold")
    kwargs = {"sweeper": threshold_sweeper(threshold)} if threshold else {}
    try:
        patch = implicit(f, _box_domain(pdom), [Bounds(a, b) for a, b in box], config, **kwargs)
    except UnknownSolutionError as exc:
        return EXIT_UNKNOWN_SOLUTION, f"unknown solution: {exc}", {"patch": None, "error": str(exc)}
    return EXIT_OK, "implicit_solution:\n  " + patch.text(list(params)).replace("\n", "\n  "), \
        {"patch": patch.to_json()}


def cmd_flow(spec: ProblemSpec, csv_path: str | None = None) -> tuple[int, str, dict]:
    names = spec.variables
    init = _require(spec, "initial")
    _check_dimension(spec, init, names, "initial")
    f = build_function(spec, names)
    if f.result_count != len(names):
        raise ParseError(f"flow needs {len(names)} field components, got {f.result_count}")
    step = float(spec.option("step", 1))
    total = float(spec.option("time", spec.option("step", 1)))
    kind = spec.option("integrator", "picard")
    if kind not in ("picard", "taylor"):
        raise ParseError(f"unknown integrator {kind!r}")
    cfg_kwargs = {"tolerance": float(spec.option("tolerance", 1e-3)), "kind": kind}
    if spec.option("order") is not None:
        cfg_kwargs["order"] = int(spec.option("order"))
    if spec.option("spatial_order") is not None:
        cfg_kwargs["spatial_order"] = int(spec.option("spatial_order"))
    if spec.option("sweep_threshold") is not None:
        cfg_kwargs["sweeper"] = threshold_sweeper(float(spec.option("sweep_threshold")))
    config = IntegratorConfig(**cfg_kwargs)
    initial = [Bounds(a, b) for a, b in init]
    try:
        steps = flow(f, initial, total, config, max_step=step)
    except IntegrationError as exc:
        return EXIT_INTEGRATION_FAILURE, f"integration failed: {exc}", \
            {"steps": None, "error": str(exc), "step_index": exc.step_index}
    blocks = []
    for k, s in enumerate(steps):
        text = s.patch.text(list(names) + ["t"]).replace("\n", "\n  ")
        blocks.append(f"step {k}: t=[{s.t0!r}:{s.t1!r}] h={s.step!r}\n  {text}")
    final = steps[-1].final_box()
    blocks.append("final: [" + ",".join(format_bounds_compact(b) for b in final) + "]")
    if csv_path:
        write_flow_csv(csv_path, steps, names, int(spec.option("samples", 11)))
    data = {"steps": [s.to_json() for s in steps], "final": [[b.lower, b.upper] for b in final]}
    return EXIT_OK, "\n".join(blocks), data


def write_flow_csv(path: str, steps, names: Sequence[str], samples: int = 11) -> None:
    """Sample each step at the centre of its initial box; one row per time."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        header = ["t"]
        for n in names:
            header += [f"{n}_lower", f"{n}_upper"]
        w.writerow(header)
        for s in steps:
            dom = s.patch.domain
            centre = dom.midpoint()[:-1]
            for i in range(samples):
                t = s.step * i / (samples - 1) if samples > 1 else 0.0
                vals = s.patch.evaluate(centre + [t])
                row = [s.t0 + t]
                for v in vals:
                    row += [v.lower, v.upper]
                w.writerow(row)


# ---------------------------------------------------------------------------
# Argument handling
# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that reports usage errors with exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_arg_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="valcalc", description="Validated solvers and flow steps.")
    parser.add_argument("positional", nargs="*", metavar="[COMMAND] [PROBLEM]",
                        help=f"command ({', '.join(COMMANDS)}) and/or a problem file of key = value lines "
                             "('-' for stdin); the command may instead be given in the file")
    parser.add_argument("--variables", help="comma-separated unknown or state names")
    parser.add_argument("--parameters", help="comma-separated parameter names (implicit)")
    parser.add_argument("-f", "--function", action="append", dest="functions", metavar="EXPR",
                        help="expression; repeat for each component (replaces file expressions)")
    parser.add_argument("--let", action="append", dest="lets", metavar="NAME=EXPR", help="define a constant")
    parser.add_argument("--domain", help="box such as [-2:3]x[-1:2]")
    parser.add_argument("--parameter-domain", help="parameter box (implicit)")
    parser.add_argument("--initial", help="initial box (flow)")
    parser.add_argument("--tolerance", type=float)
    parser.add_argument("--max-steps", type=int)
    parser.add_argument("--order", type=int, help="temporal order of the Taylor integrator")
    parser.add_argument("--spatial-order", type=int, help="spatial order of the Taylor integrator")
    parser.add_argument("--step", help="maximum step size (flow)")
    parser.add_argument("--time", help="total integration time (flow)")
    parser.add_argument("--integrator", choices=("picard", "taylor"))
    parser.add_argument("--sweep-threshold", type=float)
    parser.add_argument("--format", choices=("text", "json"))
    parser.add_argument("--output", help="write output to FILE instead of stdout")
    parser.add_argument("--csv", help="flow only: write sampled trajectories to FILE")
    parser.add_argument("--samples", type=int, help="flow CSV samples per step")
    return parser


def spec_from_args(args: argparse.Namespace) -> ProblemSpec:
    if args.problem:
        if args.problem == "-":
            text = sys.stdin.read()
        else:
            with open(args.problem) as fh:
                text = fh.read()
        spec = parse_problem(text)
    else:
        spec = ProblemSpec()
    if args.command:
        spec.command = args.command
    if args.variables is not None:
        _apply_option(spec, "variables", args.variables, None, None)
    if args.parameters is not None:
        _apply_option(spec, "parameters", args.parameters, None, None)
    for item in args.lets or []:
        if "=" not in item:
            raise ParseError(f"--let expects NAME=EXPR, got {item!r}")
        name, expr_text = item.split("=", 1)
        spec.constants[name.strip()] = parse_expression(expr_text, [], spec.constants)
    if args.functions:
        spec.expressions = [(e, 1, 1) for e in args.functions]
    for key in ("domain", "parameter_domain", "initial", "integrator", "format"):
        v = getattr(args, key)
        if v is not None:
            _apply_option(spec, key, v, None, None)
    for key in ("tolerance", "max_steps", "order", "spatial_order", "sweep_threshold", "samples"):
        v = getattr(args, key)
        if v is not None:
            spec.options[key] = v
    for key in ("step", "time"):
        v = getattr(args, key)
        if v is not None:
            _apply_option(spec, key, v, None, None)
    if spec.command is None:
        raise ParseError("no command given")
    if not spec.variables:
        raise ParseError("no variables declared")
    return spec


def run(spec: ProblemSpec, csv_path: str | None = None) -> tuple[int, str, dict]:
    """Dispatch a parsed problem; returns (exit code, text, JSON data)."""
    if spec.command == "solve":
        return cmd_solve(spec)
    if spec.command == "solve-all":
        return cmd_solve_all(spec)
    if spec.command == "implicit":
        return cmd_implicit(spec)
    if spec.command == "flow":
        return cmd_flow(spec, csv_path)
    raise ParseError(f"unknown command {spec.command!r}")


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_arg_parser()
    args = parser.parse_args(argv)
    rest = list(args.positional)
    args.command = rest.pop(0) if rest and rest[0] in COMMANDS else None
    args.problem = rest.pop(0) if rest else None
    if rest:
        parser.error(f"unexpected arguments: {' '.join(rest)}")
    try:
        spec = spec_from_args(args)
        if args.csv and spec.command != "flow":
            raise ParseError("--csv applies only to flow")
        code, text, data = run(spec, args.csv)
    except ParseError as exc:
        print(f"valcalc: parse error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"valcalc: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValcalcError, ValueError) as exc:
        print(f"valcalc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    fmt = spec.option("format", "text")
    if fmt not in ("text", "json"):
        print(f"valcalc: parse error: unknown format {fmt!r}", file=sys.stderr)
        return EXIT_USAGE
    if fmt == "json":
        out = json.dumps({"command": spec.command, "exit_code": code, **data}, indent=2)
    else:
        out = text
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(out + "\n")
    else:
        print(out)
    return code


if __name__ == "__main__":
    sys.exit(main())

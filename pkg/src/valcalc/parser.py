"""Expression grammar with named variables and exact decimal literals.

Grammar::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := ("+" | "-") unary | power
    power  := atom (("^" | "**") ["-"] INTEGER)?
    atom   := NUMBER | NAME | NAME "(" expr ("," expr)* ")" | "(" expr ")"

Decimal literals such as ``0.7`` or ``1e-3`` denote the exact rational they
spell, never the nearest binary float.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .errors import ParseError
from .function import Expr, ExpressionFunction, as_expr, binary, constant, coordinate, power, unary

FUNCTIONS_1 = ("exp", "log", "sin", "cos", "tan", "atan", "sqrt", "rec", "sqr", "hlf", "abs")
FUNCTIONS_2 = ("max", "min")

_TOKEN = re.compile(
    r"(?P<ws>[ \t\r\n]+)"
    r"|(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>\*\*|[-+*/^(),])"
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


def parse_decimal(text: str) -> Fraction:
    """Exact rational value of a decimal literal such as ``-1.25e-3``."""
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"invalid number {text!r}") from exc


def tokenize(text: str, line: int = 1, column: int = 1) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, column)
        kind = m.lastgroup
        chunk = m.group()
        if kind != "ws":
            tokens.append(Token(kind, chunk, line, column))
        for ch in chunk:
            if ch == "\n":
                line, column = line + 1, 1
            else:
                column += 1
        pos = m.end()
    tokens.append(Token("end", "", line, column))
    return tokens


class _Parser:
    def __init__(self, tokens: list[Token], variables: Sequence[str], parameters: Mapping):
        self.tokens = tokens
        self.i = 0
        self.variables = {name: k for k, name in enumerate(variables)}
        self.parameters = dict(parameters)

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def error(self, message: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.tok
        return ParseError(message, tok.line, tok.column)

    def accept(self, *texts: str) -> Token | None:
        if self.tok.kind == "op" and self.tok.text in texts:
            t = self.tok
            self.i += 1
            return t
        return None

    def expect(self, text: str) -> Token:
        t = self.accept(text)
        if t is None:
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        return t

    def parse(self) -> Expr:
        e = self.expr()
        if self.tok.kind != "end":
            raise self.error(f"unexpected {self.tok.text!r}")
        return e

    def expr(self) -> Expr:
        e = self.term()
        while True:
            t = self.accept("+", "-")
            if t is None:
                return e
            rhs = self.term()
            e = binary("add" if t.text == "+" else "sub", e, rhs)

    def term(self) -> Expr:
        e = self.unary()
        while True:
            t = self.accept("*", "/")
            if t is None:
                return e
            rhs = self.unary()
            if t.text == "/" and rhs.is_constant(0):
                raise self.error("division by the constant zero", t)
            e = binary("mul" if t.text == "*" else "div", e, rhs)

    def unary(self) -> Expr:
        if self.accept("-"):
            return -self.unary()
        if self.accept("+"):
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.accept("^", "**"):
            negative = self.accept("-") is not None
            t = self.tok
            if t.kind != "num" or not t.text.isdigit():
                raise self.error("exponent must be an integer literal")
            self.i += 1
            k = int(t.text)
            if base.is_constant(0) and negative:
                raise self.error("negative power of zero", t)
            return power(base, -k if negative else k)
        return base

    def atom(self) -> Expr:
        t = self.tok
        if t.kind == "num":
            self.i += 1
            return constant(parse_decimal(t.text))
        if t.kind == "name":
            self.i += 1
            if self.accept("("):
                return self.call(t)
            if t.text in self.variables:
                return coordinate(self.variables[t.text])
            if t.text in self.parameters:
                return as_expr(self.parameters[t.text])
            raise self.error(f"unknown name {t.text!r}", t)
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        found = t.text or "end of input"
        raise self.error(f"unexpected {found!r}")

    def call(self, name: Token) -> Expr:
        args = [self.expr()]
        while self.accept(","):
            args.append(self.expr())
        self.expect(")")
        if name.text in FUNCTIONS_1:
            if len(args) != 1:
                raise self.error(f"{name.text} takes one argument", name)
            return unary(name.text, args[0])
        if name.text in FUNCTIONS_2:
            if len(args) != 2:
                raise self.error(f"{name.text} takes two arguments", name)
            return binary(name.text, args[0], args[1])
        raise self.error(f"unknown function {name.text!r}", name)


def parse_expression(text: str, variables: Sequence[str], parameters: Mapping | None = None,
                     line: int = 1, column: int = 1) -> Expr:
    """Parse one expression over the named ``variables``.

    Args:
        text: source text.
        variables: argument names; the k-th name becomes coordinate k.
        parameters: extra names bound to constants or expressions.
        line: line number of ``text`` inside a larger file, for messages.
        column: column of the first character, for messages.
    """
    names = list(variables)
    if len(set(names)) != len(names):
        raise ParseError("variable names must be unique", line, column)
    for n in names:
        if n in FUNCTIONS_1 or n in FUNCTIONS_2:
            raise ParseError(f"variable name {n!r} clashes with a function", line, column)
    return _Parser(tokenize(text, line, column), names, parameters or {}).parse()


def parse_function(texts: Sequence[str] | str, variables: Sequence[str],
                   parameters: Mapping | None = None) -> ExpressionFunction:
    """Parse a comma-free list of expressions (or ``;``-separated string)."""
    if isinstance(texts, str):
        texts = [t for t in texts.split(";") if t.strip()]
    outputs = [parse_expression(t, variables, parameters) for t in texts]
    return ExpressionFunction(len(variables), outputs, list(variables))


_INTERVAL = re.compile(r"\s*\[\s*([^:\]]+?)\s*:\s*([^\]]+?)\s*\]\s*")


def parse_interval(text: str, line: int | None = None) -> tuple[Fraction, Fraction]:
    """Parse ``[a:b]`` (or a single number, meaning [a:a]) into exact endpoints."""
    m = _INTERVAL.fullmatch(text)
    if m is None:
        s = text.strip()
        try:
            v = Fraction(s)
        except (ValueError, ZeroDivisionError):
            raise ParseError(f"invalid interval {text.strip()!r}", line) from None
        return v, v
    try:
        a, b = Fraction(m.group(1)), Fraction(m.group(2))
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"invalid interval endpoints in {text.strip()!r}", line) from None
    if a > b:
        raise ParseError(f"empty interval {text.strip()!r}", line)
    return a, b


def parse_box(text: str, line: int | None = None) -> list[tuple[Fraction, Fraction]]:
    """Parse a product of intervals such as ``[-2:3]x[-1:2]`` (also ``×`` or ``*``)."""
    parts = re.split(r"\]\s*[x×*]\s*\[", text.strip())
    if len(parts) > 1:
        parts = [parts[0] + "]"] + ["[" + p + "]" for p in parts[1:-1]] + ["[" + parts[-1]]
    return [parse_interval(p, line) for p in parts]


def parse_names(text: str, line: int | None = None) -> list[str]:
    names = [n.strip() for n in re.split(r"[,\s]+", text.strip()) if n.strip()]
    for n in names:
        if not re.fullmatch(r"[A-Za-z_][A-Za-z_0-9]*", n):
            raise ParseError(f"invalid variable name {n!r}", line)
    if len(set(names)) != len(names):
        raise ParseError("variable names must be unique", line)
    return names

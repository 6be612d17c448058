"""Dense vectors and matrices over arbitrary scalar algebras."""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from .algebra import apply_unary, constant_like
from .errors import ShapeError, SingularMatrixError
from .numerics import Bounds


def _zero_of(proto):
    if proto is None:
        return Fraction(0)
    return constant_like(proto, 0)


class Vector:
    """Finite sequence of scalars in a canonical basis.

    ``zero_element`` records the scalar kind so that even empty vectors know
    how to build zeros of the right algebra.
    """

    __slots__ = ("elements", "zero_element")

    def __init__(self, elements: Iterable, zero_element=None):
        self.elements = list(elements)
        if zero_element is None:
            zero_element = _zero_of(self.elements[0]) if self.elements else Fraction(0)
        self.zero_element = zero_element

    @classmethod
    def zeros(cls, n: int, zero_element) -> "Vector":
        return cls([zero_element] * n, zero_element)

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __getitem__(self, i):
        return self.elements[i]

    def _check(self, other: "Vector") -> None:
        if len(self) != len(other):
            raise ShapeError(f"vector lengths differ: {len(self)} vs {len(other)}")

    def __add__(self, other: "Vector") -> "Vector":
        self._check(other)
        return Vector([a + b for a, b in zip(self, other)], self.zero_element)

    def __sub__(self, other: "Vector") -> "Vector":
        self._check(other)
        return Vector([a - b for a, b in zip(self, other)], self.zero_element)

    def __neg__(self) -> "Vector":
        return Vector([-a for a in self], self.zero_element)

    def __mul__(self, c) -> "Vector":
        return Vector([a * c for a in self], self.zero_element)

    def __rmul__(self, c) -> "Vector":
        return Vector([c * a for a in self], self.zero_element)

    def __truediv__(self, c) -> "Vector":
        return Vector([a / c for a in self], self.zero_element)

    def dot(self, other: "Vector"):
        self._check(other)
        acc = self.zero_element
        for a, b in zip(self, other):
            acc = acc + a * b
        return acc

    def __eq__(self, other) -> bool:
        if not isinstance(other, Vector):
            return NotImplemented
        return self.elements == other.elements

    def __repr__(self) -> str:
        return f"Vector({self.elements!r})"

    def __str__(self) -> str:
        return "(" + ", ".join(str(e) for e in self.elements) + ")"


def norm(v: Sequence, which: str = "sup"):
    """Supremum (default), Euclidean or one-norm.

    For :class:`Bounds` entries the result is an enclosure of the norms of
    all point vectors inside ``v``; its upper endpoint is the bound.
    """
    elems = list(v)
    if not elems:
        return _zero_of(getattr(v, "zero_element", None))
    absolutes = [apply_unary("abs", e) for e in elems]
    if which == "sup":
        out = absolutes[0]
        for a in absolutes[1:]:
            out = out.max(a) if isinstance(out, Bounds) else max(out, a)
        return out
    if which == "one":
        out = absolutes[0]
        for a in absolutes[1:]:
            out = out + a
        return out
    if which == "euclidean":
        out = elems[0] * elems[0]
        for e in elems[1:]:
            out = out + e * e
        if isinstance(out, Bounds):
            return out.max(Bounds(0.0)).sqrt()
        return apply_unary("sqrt", out)
    raise ValueError(f"unknown norm {which!r}")


class Matrix:
    """Dense row-major matrix."""

    __slots__ = ("rows", "cols", "entries", "zero_element")

    def __init__(self, entries: Sequence[Sequence], zero_element=None):
        self.entries = [list(r) for r in entries]
        self.rows = len(self.entries)
        self.cols = len(self.entries[0]) if self.entries else 0
        if any(len(r) != self.cols for r in self.entries):
            raise ShapeError("ragged matrix rows")
        if zero_element is None:
            zero_element = _zero_of(self.entries[0][0]) if self.rows and self.cols else Fraction(0)
        self.zero_element = zero_element

    @classmethod
    def identity(cls, n: int, zero_element=Fraction(0)) -> "Matrix":
        one = constant_like(zero_element, 1)
        return cls([[one if i == j else zero_element for j in range(n)] for i in range(n)], zero_element)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def row(self, i: int) -> list:
        return list(self.entries[i])

    def column(self, j: int) -> list:
        return [r[j] for r in self.entries]

    def transpose(self) -> "Matrix":
        return Matrix([self.column(j) for j in range(self.cols)], self.zero_element)

    def _check_same(self, other: "Matrix") -> None:
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ShapeError("matrix shapes differ")

    def __add__(self, other: "Matrix") -> "Matrix":
        self._check_same(other)
        return Matrix([[a + b for a, b in zip(r, s)] for r, s in zip(self.entries, other.entries)], self.zero_element)

    def __sub__(self, other: "Matrix") -> "Matrix":
        self._check_same(other)
        return Matrix([[a - b for a, b in zip(r, s)] for r, s in zip(self.entries, other.entries)], self.zero_element)

    def __neg__(self) -> "Matrix":
        return Matrix([[-a for a in r] for r in self.entries], self.zero_element)

    def scale(self, c) -> "Matrix":
        return Matrix([[c * a for a in r] for r in self.entries], self.zero_element)

    def __matmul__(self, other):
        if isinstance(other, Matrix):
            if self.cols != other.rows:
                raise ShapeError("inner matrix dimensions differ")
            out = []
            for i in range(self.rows):
                row = []
                for j in range(other.cols):
                    acc = None
                    for k in range(self.cols):
                        t = self.entries[i][k] * other.entries[k][j]
                        acc = t if acc is None else acc + t
                    row.append(acc if acc is not None else self.zero_element)
                out.append(row)
            return Matrix(out)
        vec = list(other)
        if self.cols != len(vec):
            raise ShapeError("matrix-vector dimensions differ")
        out = []
        for r in self.entries:
            acc = None
            for a, x in zip(r, vec):
                t = a * x
                acc = t if acc is None else acc + t
            out.append(acc if acc is not None else self.zero_element)
        return Vector(out)

    def map(self, fn: Callable) -> "Matrix":
        return Matrix([[fn(a) for a in r] for r in self.entries])

    def __repr__(self) -> str:
        return f"Matrix({self.entries!r})"

    def __str__(self) -> str:
        return "[" + "; ".join(", ".join(str(a) for a in r) for r in self.entries) + "]"


def _bounds_pivot_key(x) -> tuple[float, float]:
    b = x if isinstance(x, Bounds) else Bounds(x)
    return b.mig(), abs(b.mid())


def gauss_solve(A: Matrix | Sequence[Sequence], b: Sequence, pivot_key: Callable = _bounds_pivot_key) -> Vector:
    """Gaussian elimination with partial pivoting in any field-like algebra.

    ``pivot_key(x)`` returns a sortable key whose first component is a
    lower bound on ``|x|``; a pivot whose key starts with 0 may be zero and
    makes the solve fail with :class:`SingularMatrixError`.
    """
    M = A.entries if isinstance(A, Matrix) else [list(r) for r in A]
    n = len(M)
    if any(len(r) != n for r in M):
        raise ShapeError("gauss_solve requires a square matrix")
    rhs = list(b)
    if len(rhs) != n:
        raise ShapeError("right-hand side length differs from matrix size")
    M = [list(r) for r in M]
    for k in range(n):
        best = max(range(k, n), key=lambda i: pivot_key(M[i][k]))
        if pivot_key(M[best][k])[0] <= 0:
            raise SingularMatrixError(f"pivot {k} may be zero")
        if best != k:
            M[k], M[best] = M[best], M[k]
            rhs[k], rhs[best] = rhs[best], rhs[k]
        piv = M[k][k]
        inv = apply_unary("rec", piv)
        for i in range(k + 1, n):
            factor = M[i][k] * inv
            for j in range(k + 1, n):
                M[i][j] = M[i][j] - factor * M[k][j]
            rhs[i] = rhs[i] - factor * rhs[k]
    x = [None] * n
    for i in range(n - 1, -1, -1):
        acc = rhs[i]
        for j in range(i + 1, n):
            acc = acc - M[i][j] * x[j]
        x[i] = acc * apply_unary("rec", M[i][i])
    return Vector(x)


def interval_gauss_solve(A: Matrix | Sequence[Sequence], b: Sequence) -> Vector:
    """Enclose {A0^-1 b0 : A0 in A, b0 in b} for an interval system.

    Pivots are chosen by largest mignitude (ties broken by midpoint
    magnitude).  Raises :class:`SingularMatrixError` if every candidate
    pivot contains zero.
    """
    rows = A.entries if isinstance(A, Matrix) else A
    M = [[Bounds(a) if not isinstance(a, Bounds) else a for a in r] for r in rows]
    rhs = [Bounds(v) if not isinstance(v, Bounds) else v for v in b]
    return gauss_solve(M, rhs, _bounds_pivot_key)


def midpoint_matrix(A: Matrix | Sequence[Sequence]) -> np.ndarray:
    rows = A.entries if isinstance(A, Matrix) else A
    return np.array([[a.mid() if isinstance(a, Bounds) else float(a) for a in r] for r in rows], dtype=float)


def midpoint_inverse(A: Matrix | Sequence[Sequence]) -> Matrix:
    """Approximate float inverse of the midpoint matrix (no validation)."""
    m = midpoint_matrix(A)
    try:
        inv = np.linalg.inv(m)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError("midpoint matrix is singular") from exc
    if not np.all(np.isfinite(inv)):
        raise SingularMatrixError("midpoint matrix is numerically singular")
    return Matrix([[float(v) for v in r] for r in inv])

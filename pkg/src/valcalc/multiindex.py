"""Multi-indices and the graded reverse-lexicographic term order."""

from __future__ import annotations

from functools import lru_cache
from math import factorial, prod


def graded_revlex_key(alpha: tuple[int, ...]) -> tuple:
    """Sort key: total degree first, then exponents compared from the last variable.

    The constant index sorts first, so prepending a constant term is cheap.
    """
    return (sum(alpha), alpha[::-1])


class MultiIndex(tuple):
    """Exponent vector alpha in N^n; hashes and compares equal to the plain tuple."""

    __slots__ = ()

    def __new__(cls, exponents):
        exps = tuple(int(e) for e in exponents)
        if any(e < 0 for e in exps):
            raise ValueError("multi-index exponents must be nonnegative")
        return super().__new__(cls, exps)

    @classmethod
    def zero(cls, n: int) -> "MultiIndex":
        return cls((0,) * n)

    @classmethod
    def unit(cls, n: int, j: int) -> "MultiIndex":
        return cls(tuple(1 if i == j else 0 for i in range(n)))

    @property
    def degree(self) -> int:
        return sum(self)

    @property
    def factorial(self) -> int:
        return prod(factorial(a) for a in self)

    def __add__(self, other) -> "MultiIndex":
        return MultiIndex(a + b for a, b in zip(self, other))

    def __lt__(self, other) -> bool:
        return graded_revlex_key(self) < graded_revlex_key(tuple(other))

    def __le__(self, other) -> bool:
        return graded_revlex_key(self) <= graded_revlex_key(tuple(other))

    def __gt__(self, other) -> bool:
        return graded_revlex_key(self) > graded_revlex_key(tuple(other))

    def __ge__(self, other) -> bool:
        return graded_revlex_key(self) >= graded_revlex_key(tuple(other))

    def __repr__(self) -> str:
        return f"MultiIndex({tuple(self)!r})"


@lru_cache(maxsize=None)
def indices_up_to(n: int, d: int) -> tuple[tuple[int, ...], ...]:
    """All alpha in N^n with |alpha| <= d, in graded reverse-lex order."""
    out: list[tuple[int, ...]] = []

    def rec(prefix: tuple[int, ...], remaining: int) -> None:
        if len(prefix) == n:
            out.append(prefix)
            return
        for e in range(remaining + 1):
            rec(prefix + (e,), remaining - e)

    rec((), d)
    out.sort(key=graded_revlex_key)
    return tuple(out)


def add_indices(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(x + y for x, y in zip(a, b))


def format_monomial(alpha: tuple[int, ...], names=None) -> str:
    parts = []
    for i, e in enumerate(alpha):
        if e == 0:
            continue
        name = names[i] if names else f"x{i}"
        parts.append(name if e == 1 else f"{name}^{e}")
    return "*".join(parts)

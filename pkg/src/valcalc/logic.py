"""Three-valued logic for predicates that are only quasi-decidable.

Comparing two enclosures of real numbers can prove ``x < y``, disprove it,
or be inconclusive when the enclosures overlap.  ``ValidatedKleenean``
carries that third outcome explicitly and obeys Kleene's strong truth
tables, so ``FALSE & INDETERMINATE`` is still ``FALSE``.
"""

from __future__ import annotations

from enum import Enum


class ValidatedKleenean(Enum):
    TRUE = "TRUE"
    FALSE = "FALSE"
    INDETERMINATE = "INDETERMINATE"

    @classmethod
    def from_bool(cls, value: bool) -> "ValidatedKleenean":
        return cls.TRUE if value else cls.FALSE

    def __invert__(self) -> "ValidatedKleenean":
        if self is ValidatedKleenean.TRUE:
            return ValidatedKleenean.FALSE
        if self is ValidatedKleenean.FALSE:
            return ValidatedKleenean.TRUE
        return self

    def __and__(self, other: "ValidatedKleenean") -> "ValidatedKleenean":
        other = _as_kleenean(other)
        if self is ValidatedKleenean.FALSE or other is ValidatedKleenean.FALSE:
            return ValidatedKleenean.FALSE
        if self is ValidatedKleenean.TRUE and other is ValidatedKleenean.TRUE:
            return ValidatedKleenean.TRUE
        return ValidatedKleenean.INDETERMINATE

    def __or__(self, other: "ValidatedKleenean") -> "ValidatedKleenean":
        other = _as_kleenean(other)
        if self is ValidatedKleenean.TRUE or other is ValidatedKleenean.TRUE:
            return ValidatedKleenean.TRUE
        if self is ValidatedKleenean.FALSE and other is ValidatedKleenean.FALSE:
            return ValidatedKleenean.FALSE
        return ValidatedKleenean.INDETERMINATE

    __rand__ = __and__
    __ror__ = __or__

    def implies(self, other: "ValidatedKleenean") -> "ValidatedKleenean":
        return ~self | other

    def __bool__(self) -> bool:
        # Implicit truth testing would silently pick a policy for INDETERMINATE.
        raise TypeError(
            "use definitely(), possibly() or decide() to convert a Kleenean to bool"
        )

    def __str__(self) -> str:
        return self.value


TRUE = ValidatedKleenean.TRUE
FALSE = ValidatedKleenean.FALSE
INDETERMINATE = ValidatedKleenean.INDETERMINATE


class ApproximateKleenean(Enum):
    """Outcome of comparing approximations that carry no error bounds."""

    LIKELY = "LIKELY"
    UNLIKELY = "UNLIKELY"

    def __invert__(self) -> "ApproximateKleenean":
        if self is ApproximateKleenean.LIKELY:
            return ApproximateKleenean.UNLIKELY
        return ApproximateKleenean.LIKELY

    def __str__(self) -> str:
        return self.value


LIKELY = ApproximateKleenean.LIKELY
UNLIKELY = ApproximateKleenean.UNLIKELY


def _as_kleenean(value) -> ValidatedKleenean:
    if isinstance(value, ValidatedKleenean):
        return value
    if isinstance(value, bool):
        return ValidatedKleenean.from_bool(value)
    raise TypeError(f"cannot combine Kleenean with {type(value).__name__}")


def kleene_not(a: ValidatedKleenean) -> ValidatedKleenean:
    return ~_as_kleenean(a)


def kleene_and(a: ValidatedKleenean, b: ValidatedKleenean) -> ValidatedKleenean:
    return _as_kleenean(a) & b


def kleene_or(a: ValidatedKleenean, b: ValidatedKleenean) -> ValidatedKleenean:
    return _as_kleenean(a) | b


def definitely(k) -> bool:
    """True only when ``k`` is proven TRUE."""
    if isinstance(k, bool):
        return k
    return _as_kleenean(k) is ValidatedKleenean.TRUE


def possibly(k) -> bool:
    """False only when ``k`` is proven FALSE."""
    if isinstance(k, bool):
        return k
    return _as_kleenean(k) is not ValidatedKleenean.FALSE


def decide(k) -> bool:
    """Force a boolean; INDETERMINATE is mapped to False."""
    return definitely(k)


def probably(k: ApproximateKleenean) -> bool:
    return k is ApproximateKleenean.LIKELY


def bounds_less(x, y) -> ValidatedKleenean:
    """Validated ``x < y`` for objects with ``lower``/``upper`` endpoints."""
    if x.upper < y.lower:
        return TRUE
    if x.lower >= y.upper:
        return FALSE
    return INDETERMINATE


def bounds_less_equal(x, y) -> ValidatedKleenean:
    if x.upper <= y.lower:
        return TRUE
    if x.lower > y.upper:
        return FALSE
    return INDETERMINATE


def approximate_less(x: float, y: float) -> ApproximateKleenean:
    return LIKELY if x < y else UNLIKELY

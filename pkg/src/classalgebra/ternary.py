"""Strong Kleene three-valued logic.

Truth values are ordered false < unknown < true; conjunction is min,
disjunction is max, negation swaps true/false and fixes unknown.
"""

from __future__ import annotations

import enum
from typing import Iterable


class Ternary(enum.IntEnum):
    FALSE = 0
    UNKNOWN = 1
    TRUE = 2

    def __str__(self) -> str:
        return {0: "false", 1: "unknown", 2: "true"}[int(self)]


TRUE = Ternary.TRUE
FALSE = Ternary.FALSE
UNKNOWN = Ternary.UNKNOWN


def t_and(a: Ternary, b: Ternary) -> Ternary:
    return a if a <= b else b


def t_or(a: Ternary, b: Ternary) -> Ternary:
    return a if a >= b else b


def t_not(a: Ternary) -> Ternary:
    return Ternary(2 - int(a))


def t_all(values: Iterable[Ternary]) -> Ternary:
    """Kleene conjunction over an iterable; empty iterable is true."""
    out = TRUE
    for v in values:
        if v < out:
            out = v
        if out is FALSE:
            break
    return out


def t_any(values: Iterable[Ternary]) -> Ternary:
    """Kleene disjunction over an iterable; empty iterable is false."""
    out = FALSE
    for v in values:
        if v > out:
            out = v
        if out is TRUE:
            break
    return out


def from_bool(b: bool) -> Ternary:
    return TRUE if b else FALSE

"""Interval algebra over a dense total order.

Comparison atoms on one attribute path denote rays or points over the
constant domain (rationals, or strings under lexicographic order).  The
normalizer reasons about entailment between such atoms via region
inclusion, and about joint satisfiability via region covering.  The
domain is treated as dense and unbounded in both directions; for strings
this is an abstraction (it claims strictly fewer entailments than the
discrete reality, so everything asserted remains sound).

An ``Interval`` has endpoint values or ``None`` for the corresponding
infinity.  A region is a list of disjoint, sorted intervals.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple


@dataclass(frozen=True)
class Interval:
    lo: Optional[object]  # None = -infinity
    lo_open: bool
    hi: Optional[object]  # None = +infinity
    hi_open: bool

    def is_empty(self) -> bool:
        if self.lo is None or self.hi is None:
            return False
        if self.lo < self.hi:
            return False
        if self.lo > self.hi:
            return True
        return self.lo_open or self.hi_open


FULL = Interval(None, True, None, True)


def point(v) -> Interval:
    return Interval(v, False, v, False)


def below(v, strict: bool) -> Interval:
    """(-inf, v) when strict else (-inf, v]."""
    return Interval(None, True, v, strict)


def above(v, strict: bool) -> Interval:
    return Interval(v, strict, None, True)


def _lo_key(iv: Interval) -> Tuple:
    # -infinity sorts first; at equal values, closed before open.
    if iv.lo is None:
        return (0, 0, 0)
    return (1, iv.lo, 1 if iv.lo_open else 0)


def _max_lo(a: Interval, b: Interval) -> Tuple[Optional[object], bool]:
    ka, kb = _lo_key(a), _lo_key(b)
    winner = a if ka >= kb else b
    return winner.lo, winner.lo_open


def _min_hi(a: Interval, b: Interval) -> Tuple[Optional[object], bool]:
    def key(iv):
        if iv.hi is None:
            return (1, 0, 0)
        return (0, iv.hi, -1 if iv.hi_open else 0)

    winner = a if key(a) <= key(b) else b
    return winner.hi, winner.hi_open


def intersect(a: Interval, b: Interval) -> Interval:
    lo, lo_open = _max_lo(a, b)
    hi, hi_open = _min_hi(a, b)
    return Interval(lo, lo_open, hi, hi_open)


def complement(iv: Interval) -> List[Interval]:
    out = []
    if iv.lo is not None:
        out.append(Interval(None, True, iv.lo, not iv.lo_open))
    if iv.hi is not None:
        out.append(Interval(iv.hi, not iv.hi_open, None, True))
    return [p for p in out if not p.is_empty()]


def subtract(iv: Interval, removals: List[Interval]) -> List[Interval]:
    """The region iv minus the union of removals, as disjoint intervals."""
    parts = [iv]
    for r in removals:
        nxt: List[Interval] = []
        for p in parts:
            for c in complement(r):
                piece = intersect(p, c)
                if not piece.is_empty():
                    nxt.append(piece)
        parts = nxt
        if not parts:
            break
    return parts


def is_subset(a: Interval, covers: List[Interval]) -> bool:
    """True iff region a is contained in the union of ``covers``."""
    return not subtract(a, covers)


def union_is_connected(a: Interval, b: Interval) -> bool:
    """True iff the union of two nonempty intervals is itself an interval."""
    if a.is_empty() or b.is_empty():
        return True
    gap_after_a = _gap(a, b)
    gap_after_b = _gap(b, a)
    return not (gap_after_a or gap_after_b)


def _gap(first: Interval, second: Interval) -> bool:
    """True iff ``second`` starts strictly after ``first`` ends with a hole."""
    if first.hi is None or second.lo is None:
        return False
    if first.hi > second.lo:
        return False
    if first.hi == second.lo:
        # Touching endpoints leave a hole only when both sides are open.
        return first.hi_open and second.lo_open
    return True


def hull(a: Interval, b: Interval) -> Interval:
    """Smallest interval containing both (meaningful when connected)."""
    lo_a, lo_b = _lo_key(a), _lo_key(b)
    lo_src = a if lo_a <= lo_b else b

    def hi_key(iv):
        if iv.hi is None:
            return (1, 0, 0)
        return (0, iv.hi, -1 if iv.hi_open else 0)

    hi_src = a if hi_key(a) >= hi_key(b) else b
    return Interval(lo_src.lo, lo_src.lo_open, hi_src.hi, hi_src.hi_open)

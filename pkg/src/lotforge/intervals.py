"""Half-open period intervals.

An interval (a, b] with 0 <= a < b <= T stands for the periods a+1 .. b.
Intervals are passed around as plain (a, b) tuples.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Iterator


def all_intervals(T: int) -> Iterator[tuple[int, int]]:
    """Yield every (a, b] over [T], ascending by a then b."""
    for a in range(T):
        for b in range(a + 1, T + 1):
            yield (a, b)


def periods_of(a: int, b: int) -> range:
    return range(a + 1, b + 1)


def cap_within(C, a: int, b: int, chosen: Iterable[int]) -> Fraction:
    """Total capacity of the chosen periods that fall inside (a, b]."""
    total = Fraction(0)
    for s in chosen:
        if a < s <= b:
            total += C[s - 1]
    return total

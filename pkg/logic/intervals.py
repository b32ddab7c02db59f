"""
Finite unions of rational intervals.

Truth sets of formulas in one real variable are IntervalSets; bounds are
exact rationals, None standing for an infinite end.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Tuple

from utils.cache import format_rational


@dataclass(frozen=True)
class Interval:
    lo: Optional[Fraction]
    hi: Optional[Fraction]
    lo_closed: bool = True
    hi_closed: bool = True

    def __post_init__(self):
        if self.lo is None and self.lo_closed:
            object.__setattr__(self, "lo_closed", False)
        if self.hi is None and self.hi_closed:
            object.__setattr__(self, "hi_closed", False)

    @property
    def is_empty(self) -> bool:
        if self.lo is None or self.hi is None:
            return False
        if self.lo > self.hi:
            return True
        return self.lo == self.hi and not (self.lo_closed and self.hi_closed)

    @property
    def is_point(self) -> bool:
        return self.lo is not None and self.lo == self.hi and self.lo_closed and self.hi_closed

    def contains(self, value: Fraction) -> bool:
        if self.lo is not None and (value < self.lo or value == self.lo and not self.lo_closed):
            return False
        if self.hi is not None and (value > self.hi or value == self.hi and not self.hi_closed):
            return False
        return True

    def __str__(self):
        left = "[" if self.lo_closed else "("
        right = "]" if self.hi_closed else ")"
        lo = "-inf" if self.lo is None else format_rational(self.lo)
        hi = "inf" if self.hi is None else format_rational(self.hi)
        return f"{left}{lo}, {hi}{right}"


def _lo_key(interval: Interval):
    if interval.lo is None:
        return (0, Fraction(0), 0)
    return (1, interval.lo, 0 if interval.lo_closed else 1)


def _touches(current: Interval, following: Interval) -> bool:
    """following starts no later than where current ends, assuming sorted order"""
    if current.hi is None or following.lo is None:
        return True
    if following.lo < current.hi:
        return True
    return following.lo == current.hi and (current.hi_closed or following.lo_closed)


def _max_hi(a: Interval, b: Interval) -> Tuple[Optional[Fraction], bool]:
    if a.hi is None or b.hi is None:
        return None, False
    if a.hi == b.hi:
        return a.hi, a.hi_closed or b.hi_closed
    return (a.hi, a.hi_closed) if a.hi > b.hi else (b.hi, b.hi_closed)


def _normalize(intervals) -> Tuple[Interval, ...]:
    ordered = sorted((iv for iv in intervals if not iv.is_empty), key=_lo_key)
    merged: List[Interval] = []
    for interval in ordered:
        if merged and _touches(merged[-1], interval):
            last = merged[-1]
            hi, hi_closed = _max_hi(last, interval)
            merged[-1] = Interval(last.lo, hi, last.lo_closed, hi_closed)
        else:
            merged.append(interval)
    return tuple(merged)


def _intersect(a: Interval, b: Interval) -> Interval:
    if a.lo is None:
        lo, lo_closed = b.lo, b.lo_closed
    elif b.lo is None or a.lo > b.lo:
        lo, lo_closed = a.lo, a.lo_closed
    elif a.lo == b.lo:
        lo, lo_closed = a.lo, a.lo_closed and b.lo_closed
    else:
        lo, lo_closed = b.lo, b.lo_closed
    if a.hi is None:
        hi, hi_closed = b.hi, b.hi_closed
    elif b.hi is None or a.hi < b.hi:
        hi, hi_closed = a.hi, a.hi_closed
    elif a.hi == b.hi:
        hi, hi_closed = a.hi, a.hi_closed and b.hi_closed
    else:
        hi, hi_closed = b.hi, b.hi_closed
    return Interval(lo, hi, lo_closed, hi_closed)


@dataclass(frozen=True)
class IntervalSet:
    """Sorted, disjoint and non-adjacent intervals"""
    intervals: Tuple[Interval, ...] = ()

    @classmethod
    def of(cls, *intervals: Interval) -> "IntervalSet":
        return cls(_normalize(intervals))

    @classmethod
    def empty(cls) -> "IntervalSet":
        return cls(())

    @classmethod
    def everything(cls) -> "IntervalSet":
        return cls((Interval(None, None, False, False),))

    @classmethod
    def point(cls, value) -> "IntervalSet":
        value = Fraction(value)
        return cls((Interval(value, value),))

    @classmethod
    def closed(cls, lo, hi) -> "IntervalSet":
        return cls.of(Interval(None if lo is None else Fraction(lo),
                               None if hi is None else Fraction(hi)))

    @classmethod
    def below(cls, bound, closed: bool) -> "IntervalSet":
        return cls.of(Interval(None, Fraction(bound), False, closed))

    @classmethod
    def above(cls, bound, closed: bool) -> "IntervalSet":
        return cls.of(Interval(Fraction(bound), None, closed, False))

    @property
    def is_empty(self) -> bool:
        return not self.intervals

    @property
    def is_everything(self) -> bool:
        return len(self.intervals) == 1 and self.intervals[0].lo is None and self.intervals[0].hi is None

    def contains(self, value) -> bool:
        value = Fraction(value)
        return any(interval.contains(value) for interval in self.intervals)

    def union(self, other: "IntervalSet") -> "IntervalSet":
        return IntervalSet(_normalize(self.intervals + other.intervals))

    def intersection(self, other: "IntervalSet") -> "IntervalSet":
        return IntervalSet(_normalize(_intersect(a, b) for a in self.intervals for b in other.intervals))

    def complement(self) -> "IntervalSet":
        gaps = []
        previous: Optional[Interval] = None
        for interval in self.intervals:
            if previous is None:
                if interval.lo is not None:
                    gaps.append(Interval(None, interval.lo, False, not interval.lo_closed))
            else:
                gaps.append(Interval(previous.hi, interval.lo,
                                     not previous.hi_closed, not interval.lo_closed))
            previous = interval
        if previous is None:
            return IntervalSet.everything()
        if previous.hi is not None:
            gaps.append(Interval(previous.hi, None, not previous.hi_closed, False))
        return IntervalSet(_normalize(gaps))

    def difference(self, other: "IntervalSet") -> "IntervalSet":
        return self.intersection(other.complement())

    def covers(self, other: "IntervalSet") -> bool:
        return other.difference(self).is_empty

    def infimum(self) -> Optional[Tuple[Optional[Fraction], bool]]:
        """(infimum, attained) of a nonempty set; infimum None when unbounded below"""
        if self.is_empty:
            return None
        first = self.intervals[0]
        return first.lo, first.lo_closed

    def points(self) -> Optional[List[Fraction]]:
        """The members when the set is finite"""
        if all(interval.is_point for interval in self.intervals):
            return [interval.lo for interval in self.intervals]
        return None

    def __str__(self):
        if self.is_empty:
            return "{}"
        return " U ".join(str(interval) for interval in self.intervals)

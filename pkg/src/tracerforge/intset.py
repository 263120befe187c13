"""Canonical finite sets of non-negative integers, stored as sorted intervals.

Used both for variable domains and for reduction deltas.  All sets live
inside [0, MAX_INT] where MAX_INT = 2**28 - 1, the solver's domain ceiling.
"""

from __future__ import annotations

from typing import Iterable, Iterator, Tuple

MAX_INT = 268435455  # 2**28 - 1


class IntSet:
    """Immutable canonical set of integers: disjoint, sorted, non-adjacent intervals."""

    __slots__ = ("_ivs",)

    def __init__(self, intervals: Iterable[Tuple[int, int]] = ()):
        self._ivs = _normalize(intervals)

    @classmethod
    def _raw(cls, ivs: tuple) -> "IntSet":
        s = object.__new__(cls)
        s._ivs = ivs
        return s

    @classmethod
    def from_values(cls, values: Iterable[int]) -> "IntSet":
        return cls((v, v) for v in values)

    @classmethod
    def full(cls) -> "IntSet":
        return _FULL

    @classmethod
    def empty(cls) -> "IntSet":
        return _EMPTY

    @classmethod
    def range(cls, lo: int, hi: int) -> "IntSet":
        return cls([(lo, hi)]) if lo <= hi else _EMPTY

    @property
    def intervals(self) -> tuple:
        return self._ivs

    def is_empty(self) -> bool:
        return not self._ivs

    def size(self) -> int:
        return sum(hi - lo + 1 for lo, hi in self._ivs)

    def min(self) -> int:
        if not self._ivs:
            raise ValueError("empty set has no minimum")
        return self._ivs[0][0]

    def max(self) -> int:
        if not self._ivs:
            raise ValueError("empty set has no maximum")
        return self._ivs[-1][1]

    def is_singleton(self) -> bool:
        return len(self._ivs) == 1 and self._ivs[0][0] == self._ivs[0][1]

    def __contains__(self, v: int) -> bool:
        ivs = self._ivs
        lo_i, hi_i = 0, len(ivs) - 1
        while lo_i <= hi_i:
            mid = (lo_i + hi_i) // 2
            lo, hi = ivs[mid]
            if v < lo:
                hi_i = mid - 1
            elif v > hi:
                lo_i = mid + 1
            else:
                return True
        return False

    def contains_all(self, values: Iterable[int]) -> bool:
        return all(v in self for v in values)

    def __iter__(self) -> Iterator[int]:
        for lo, hi in self._ivs:
            yield from range(lo, hi + 1)

    def __eq__(self, other) -> bool:
        return isinstance(other, IntSet) and self._ivs == other._ivs

    def __hash__(self) -> int:
        return hash(self._ivs)

    def __bool__(self) -> bool:
        return bool(self._ivs)

    def union(self, other: "IntSet") -> "IntSet":
        if not self._ivs:
            return other
        if not other._ivs:
            return self
        return IntSet(self._ivs + other._ivs)

    def intersect(self, other: "IntSet") -> "IntSet":
        out = []
        a, b = self._ivs, other._ivs
        i = j = 0
        while i < len(a) and j < len(b):
            lo = max(a[i][0], b[j][0])
            hi = min(a[i][1], b[j][1])
            if lo <= hi:
                out.append((lo, hi))
            if a[i][1] < b[j][1]:
                i += 1
            else:
                j += 1
        return IntSet._raw(tuple(out))

    def subtract(self, other: "IntSet") -> "IntSet":
        out = []
        b = other._ivs
        j = 0
        for lo, hi in self._ivs:
            cur = lo
            while j < len(b) and b[j][1] < cur:
                j += 1
            k = j
            while k < len(b) and b[k][0] <= hi:
                blo, bhi = b[k]
                if blo > cur:
                    out.append((cur, blo - 1))
                cur = bhi + 1
                if cur > hi:
                    break
                k += 1
            if cur <= hi:
                out.append((cur, hi))
        return IntSet._raw(tuple(out))

    def remove_value(self, v: int) -> "IntSet":
        return self.subtract(IntSet._raw(((v, v),)))

    def clamp_min(self, lo: int) -> "IntSet":
        if not self._ivs or lo <= self._ivs[0][0]:
            return self
        return self.intersect(IntSet.range(max(lo, 0), MAX_INT))

    def clamp_max(self, hi: int) -> "IntSet":
        if not self._ivs or hi >= self._ivs[-1][1]:
            return self
        if hi < 0:
            return _EMPTY
        return self.intersect(IntSet.range(0, hi))

    def interval_str(self) -> str:
        """Render as interval list: singletons bare, runs as ``lo-hi``."""
        parts = []
        for lo, hi in self._ivs:
            parts.append(str(lo) if lo == hi else f"{lo}-{hi}")
        return ",".join(parts)

    def __repr__(self) -> str:
        return f"IntSet[{self.interval_str()}]"


def _normalize(intervals: Iterable[Tuple[int, int]]) -> tuple:
    pairs = sorted((lo, hi) for lo, hi in intervals if lo <= hi)
    out: list = []
    for lo, hi in pairs:
        if lo < 0 or hi > MAX_INT:
            raise ValueError(f"interval ({lo},{hi}) outside [0,{MAX_INT}]")
        if out and lo <= out[-1][1] + 1:
            if hi > out[-1][1]:
                out[-1] = (out[-1][0], hi)
        else:
            out.append((lo, hi))
    return tuple(out)


def parse_interval_str(text: str) -> IntSet:
    """Inverse of :meth:`IntSet.interval_str`; empty string is the empty set."""
    text = text.strip()
    if not text:
        return _EMPTY
    ivs = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part:
            lo_s, hi_s = part.split("-", 1)
            ivs.append((int(lo_s), int(hi_s)))
        else:
            v = int(part)
            ivs.append((v, v))
    return IntSet(ivs)


def render_domain(s: IntSet, extensional_limit: int = 3) -> str:
    """Render a domain the way the trace shows it.

    Small domains are listed value by value; larger ones use interval style.
    """
    if s.size() <= extensional_limit:
        return ",".join(str(v) for v in s)
    return s.interval_str()


_EMPTY = IntSet._raw(())
_FULL = IntSet._raw(((0, MAX_INT),))

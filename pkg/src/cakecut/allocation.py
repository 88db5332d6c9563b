"""Pieces of cake, allocations, and the fairness audit."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Sequence, Tuple

from .valuation import ONE, ZERO, PiecewiseConstant, RationalLike, as_rational, evaluate, format_rational

Interval = Tuple[Fraction, Fraction]


class AllocationError(ValueError):
    pass


class OverlappingShares(AllocationError):
    pass


class AgentCountMismatch(AllocationError):
    pass


def _canonical(intervals: Iterable[Tuple[RationalLike, RationalLike]]) -> Tuple[Interval, ...]:
    spans = []
    for a, b in intervals:
        a, b = as_rational(a), as_rational(b)
        if not (ZERO <= a <= ONE and ZERO <= b <= ONE):
            raise AllocationError(f"[{a}, {b}) is not inside [0, 1]")
        if a > b:
            raise AllocationError(f"interval [{a}, {b}) has its ends reversed")
        if a < b:
            spans.append((a, b))
    spans.sort()
    merged: list[Interval] = []
    for a, b in spans:
        if merged and a <= merged[-1][1]:
            if b > merged[-1][1]:
                merged[-1] = (merged[-1][0], b)
        else:
            merged.append((a, b))
    return tuple(merged)


@dataclass(frozen=True)
class Piece:
    """Finite union of half-open intervals ``[a, b)``.

    Zero-length intervals are dropped and touching ones merged, so two pieces
    that agree up to a null set compare equal.
    """

    intervals: Tuple[Interval, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "intervals", _canonical(self.intervals))

    @classmethod
    def interval(cls, a: RationalLike, b: RationalLike) -> "Piece":
        return cls(((a, b),))

    @classmethod
    def whole(cls) -> "Piece":
        return cls(((ZERO, ONE),))

    def __iter__(self) -> Iterator[Interval]:
        return iter(self.intervals)

    def __len__(self) -> int:
        return len(self.intervals)

    def __bool__(self) -> bool:
        return bool(self.intervals)

    @property
    def length(self) -> Fraction:
        return sum((b - a for a, b in self.intervals), ZERO)

    def is_connected(self) -> bool:
        return len(self.intervals) <= 1

    def union(self, other: "Piece") -> "Piece":
        return Piece(self.intervals + other.intervals)

    __or__ = union

    def intersection(self, other: "Piece") -> "Piece":
        out = []
        i = j = 0
        mine, theirs = self.intervals, other.intervals
        while i < len(mine) and j < len(theirs):
            a = max(mine[i][0], theirs[j][0])
            b = min(mine[i][1], theirs[j][1])
            if a < b:
                out.append((a, b))
            if mine[i][1] < theirs[j][1]:
                i += 1
            else:
                j += 1
        return Piece(tuple(out))

    __and__ = intersection

    def difference(self, other: "Piece") -> "Piece":
        out = []
        for a, b in self.intervals:
            cursor = a
            for c, d in other.intervals:
                if d <= cursor or c >= b:
                    continue
                if c > cursor:
                    out.append((cursor, c))
                cursor = max(cursor, d)
                if cursor >= b:
                    break
            if cursor < b:
                out.append((cursor, b))
        return Piece(tuple(out))

    __sub__ = difference

    def complement(self) -> "Piece":
        return Piece.whole() - self

    def same_as(self, other: "Piece") -> bool:
        """Equality up to measure zero (symmetric difference of length 0)."""
        return (self - other).length == 0 and (other - self).length == 0

    def to_json(self) -> list:
        return [[format_rational(a), format_rational(b)] for a, b in self.intervals]

    @classmethod
    def from_json(cls, data: Sequence) -> "Piece":
        try:
            return cls(tuple((a, b) for a, b in data))
        except (TypeError, ValueError, ZeroDivisionError) as exc:
            raise AllocationError(f"bad piece JSON: {exc}") from exc

    def __str__(self) -> str:
        if not self.intervals:
            return "{}"
        parts = []
        for a, b in self.intervals:
            close = "]" if b == ONE else ")"
            parts.append(f"[{a}, {b}{close}")
        return " U ".join(parts)


@dataclass(frozen=True)
class Allocation:
    """One piece per agent; pieces may share endpoints but no positive length."""

    shares: Tuple[Piece, ...]

    def __post_init__(self) -> None:
        shares = tuple(s if isinstance(s, Piece) else Piece(tuple(s)) for s in self.shares)
        object.__setattr__(self, "shares", shares)
        for i in range(len(shares)):
            for j in range(i + 1, len(shares)):
                overlap = (shares[i] & shares[j]).length
                if overlap:
                    raise OverlappingShares(f"shares {i} and {j} overlap on length {overlap}")

    def __len__(self) -> int:
        return len(self.shares)

    def __getitem__(self, i: int) -> Piece:
        return self.shares[i]

    def covered(self) -> Piece:
        out = Piece()
        for s in self.shares:
            out = out | s
        return out

    def is_entire(self) -> bool:
        return self.covered().length == ONE

    def same_as(self, other: "Allocation") -> bool:
        return len(self) == len(other) and all(a.same_as(b) for a, b in zip(self.shares, other.shares))

    def to_json(self) -> dict:
        return {"shares": [s.to_json() for s in self.shares]}

    @classmethod
    def from_json(cls, data: dict) -> "Allocation":
        try:
            shares = data["shares"]
        except (KeyError, TypeError) as exc:
            raise AllocationError("allocation JSON needs a 'shares' list") from exc
        return cls(tuple(Piece.from_json(s) for s in shares))


def complement(allocation: Allocation) -> Piece:
    """The part of the cake no agent received."""
    return allocation.covered().complement()


@dataclass(frozen=True)
class AuditReport:
    proportional: bool
    envy_free: bool
    entire: bool
    connected: bool
    exact: bool
    per_agent_values: Tuple[Tuple[Fraction, ...], ...] = field(repr=False)
    totals: Tuple[Fraction, ...] = field(repr=False, default=())

    def value(self, i: int) -> Fraction:
        """What agent ``i`` thinks of her own share."""
        return self.per_agent_values[i][i]

    def to_json(self) -> dict:
        return {
            "proportional": self.proportional,
            "envy_free": self.envy_free,
            "entire": self.entire,
            "connected": self.connected,
            "exact": self.exact,
            "per_agent_values": [[format_rational(v) for v in row] for row in self.per_agent_values],
            "totals": [format_rational(t) for t in self.totals],
        }


def audit(profile: Sequence[PiecewiseConstant], allocation: Allocation) -> AuditReport:
    """Check every fairness property of ``allocation`` under ``profile``.

    ``per_agent_values[i][j]`` is agent i's value for agent j's share.
    """
    n = len(profile)
    if n == 0 or n != len(allocation):
        raise AgentCountMismatch(f"{n} densities but {len(allocation)} shares")
    values = tuple(tuple(evaluate(f, share) for share in allocation.shares) for f in profile)
    totals = tuple(f.total() for f in profile)
    proportional = all(values[i][i] >= totals[i] / n for i in range(n))
    envy_free = all(values[i][i] >= values[i][j] for i in range(n) for j in range(n))
    exact = all(values[i][j] == totals[i] / n for i in range(n) for j in range(n))
    return AuditReport(
        proportional=proportional,
        envy_free=envy_free,
        entire=allocation.is_entire(),
        connected=all(s.is_connected() for s in allocation.shares),
        exact=exact,
        per_agent_values=values,
        totals=totals,
    )

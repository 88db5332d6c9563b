"""Deterministic cake cutting mechanisms.

Every mechanism takes a profile (one density per agent, agent 0 first) and
returns an :class:`~cakecut.allocation.Allocation`.  Whenever a rule needs a
minimum or a median and several agents tie, the lowest agent index wins.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .allocation import Allocation, Piece
from .valuation import ONE, ZERO, PiecewiseConstant, ZeroTotalValue, cut, discontinuities, integrate, mark_points


class MechanismId(str, enum.Enum):
    SIMPLE_EF = "simple_ef"
    ROTATING_EF = "rotating_ef"
    CONNECTED_PROP = "connected_prop"
    CONNECTED_PROP_OPEN = "connected_prop_open"
    MOVING_KNIFE = "moving_knife"
    EVEN_PAZ = "even_paz"
    CUT_AND_CHOOSE = "cut_and_choose"


Mechanism = Callable[[Sequence[PiecewiseConstant]], Allocation]


def _require_positive_totals(profile: Sequence[PiecewiseConstant]) -> None:
    for i, f in enumerate(profile):
        if f.total() == 0:
            raise ZeroTotalValue(f"agent {i} values the whole cake at 0")


def cell_boundaries(profile: Sequence[PiecewiseConstant]) -> list[Fraction]:
    """0, every discontinuity of every agent in ascending order, then 1."""
    points = sorted({x for f in profile for x in discontinuities(f)})
    return [ZERO, *points, ONE]


def _sliced_ef(profile: Sequence[PiecewiseConstant], rotate: bool) -> Allocation:
    n = len(profile)
    if n < 1:
        raise ValueError("need at least one agent")
    xs = cell_boundaries(profile)
    parts: list[list[tuple]] = [[] for _ in range(n)]
    for j, (lo, hi) in enumerate(zip(xs, xs[1:])):
        width = hi - lo
        for i in range(n):
            slot = (i + j) % n if rotate else i
            parts[i].append((lo + width * slot / n, lo + width * (slot + 1) / n))
    return Allocation(tuple(Piece(tuple(p)) for p in parts))


def simple_ef(profile: Sequence[PiecewiseConstant]) -> Allocation:
    """Split every common constant cell into n equal slices, agents left to right."""
    return _sliced_ef(profile, rotate=False)


def rotating_ef(profile: Sequence[PiecewiseConstant]) -> Allocation:
    """Like :func:`simple_ef`, but in cell ``j`` agent ``i`` takes slice ``(i + j) mod n``.

    Indices here are 0-based, which is the same offset as ``(i + j - 1) mod n``
    with 1-based agents.
    """
    return _sliced_ef(profile, rotate=True)


@dataclass(frozen=True)
class ConnectedTrace:
    allocation: Allocation
    marks: tuple  # marks[i] = (x_1, ..., x_{n-1}) for agent i
    order: tuple  # agent served in each round, last agent at the end
    cuts: tuple  # c_0 = 0, c_1, ..., c_{n-1}


def connected_prop_trace(profile: Sequence[PiecewiseConstant], entire: bool = True) -> ConnectedTrace:
    n = len(profile)
    if n < 1:
        raise ValueError("need at least one agent")
    _require_positive_totals(profile)
    marks = [[ZERO, *mark_points(f, n), ONE] for f in profile]
    unallocated = list(range(n))
    shares: list[Piece] = [Piece() for _ in range(n)]
    cuts = [ZERO]
    order = []
    for j in range(1, n):
        winner = min(unallocated, key=lambda i: (marks[i][j], i))
        c = marks[winner][j]
        left = cuts[-1] if entire else marks[winner][j - 1]
        shares[winner] = Piece.interval(left, c)
        cuts.append(c)
        order.append(winner)
        unallocated.remove(winner)
    last = unallocated[0]
    # the non-entire rule hands every agent exactly one of her own n spans
    left = cuts[-1] if entire else marks[last][n - 1]
    shares[last] = Piece.interval(left, ONE)
    order.append(last)
    return ConnectedTrace(
        allocation=Allocation(tuple(shares)),
        marks=tuple(tuple(m[1:-1]) for m in marks),
        order=tuple(order),
        cuts=tuple(cuts),
    )


def connected_prop(profile: Sequence[PiecewiseConstant], entire: bool = True) -> Allocation:
    """Proportional allocation with connected pieces from each agent's equal-value marks."""
    return connected_prop_trace(profile, entire).allocation


def connected_prop_open(profile: Sequence[PiecewiseConstant]) -> Allocation:
    return connected_prop(profile, entire=False)


@dataclass(frozen=True)
class KnifeTrace:
    allocation: Allocation
    order: tuple  # agents in the order they were served
    cuts: tuple  # knife positions, starting at 0 and ending at 1


def moving_knife_trace(profile: Sequence[PiecewiseConstant]) -> KnifeTrace:
    n = len(profile)
    if n < 1:
        raise ValueError("need at least one agent")
    _require_positive_totals(profile)
    quota = [f.total() / n for f in profile]
    remaining = list(range(n))
    shares: list[Piece] = [Piece() for _ in range(n)]
    start = ZERO
    cuts = [start]
    order = []
    while len(remaining) > 1:
        marks = {i: cut(profile[i], start, quota[i]) for i in remaining}
        winner = min(remaining, key=lambda i: (marks[i], i))
        shares[winner] = Piece.interval(start, marks[winner])
        start = marks[winner]
        cuts.append(start)
        order.append(winner)
        remaining.remove(winner)
    shares[remaining[0]] = Piece.interval(start, ONE)
    order.append(remaining[0])
    cuts.append(ONE)
    return KnifeTrace(Allocation(tuple(shares)), tuple(order), tuple(cuts))


def moving_knife(profile: Sequence[PiecewiseConstant]) -> Allocation:
    return moving_knife_trace(profile).allocation


def _median(values: list[Fraction]) -> Fraction:
    k = len(values)
    ordered = sorted(values)
    if k % 2:
        return ordered[k // 2]
    return (ordered[k // 2 - 1] + ordered[k // 2]) / 2


@dataclass(frozen=True)
class EvenPazStep:
    left: Fraction
    right: Fraction
    agents: tuple
    marks: tuple
    cut: Fraction
    left_group: tuple


def even_paz_trace(profile: Sequence[PiecewiseConstant]) -> tuple[Allocation, list[EvenPazStep]]:
    n = len(profile)
    if n < 1:
        raise ValueError("need at least one agent")
    _require_positive_totals(profile)
    shares: list[Piece] = [Piece() for _ in range(n)]
    steps: list[EvenPazStep] = []

    def solve(lo: Fraction, hi: Fraction, agents: tuple) -> None:
        k = len(agents)
        if k == 1:
            shares[agents[0]] = Piece.interval(lo, hi)
            return
        h = k // 2
        marks = tuple(cut(profile[i], lo, integrate(profile[i], lo, hi) * h / k) for i in agents)
        x = _median(list(marks))
        ranked = sorted(zip(marks, agents))
        left = tuple(sorted(i for _, i in ranked[:h]))
        right = tuple(sorted(i for _, i in ranked[h:]))
        steps.append(EvenPazStep(lo, hi, agents, marks, x, left))
        solve(lo, x, left)
        solve(x, hi, right)

    solve(ZERO, ONE, tuple(range(n)))
    return Allocation(tuple(shares)), steps


def even_paz(profile: Sequence[PiecewiseConstant]) -> Allocation:
    """Divide and conquer: cut at the median of the agents' floor(k/2)/k marks."""
    return even_paz_trace(profile)[0]


def cut_and_choose(profile: Sequence[PiecewiseConstant]) -> Allocation:
    """Agent 0 halves the cake by her own measure, agent 1 picks.

    On a tie the chooser takes the right half.
    """
    if len(profile) != 2:
        raise ValueError("cut and choose is a two-agent protocol")
    cutter, chooser = profile
    total = cutter.total()
    if total == 0:
        raise ZeroTotalValue("the cutter values the whole cake at 0")
    x = cut(cutter, ZERO, total / 2)
    left, right = Piece.interval(ZERO, x), Piece.interval(x, ONE)
    if integrate(chooser, ZERO, x) > integrate(chooser, x, ONE):
        return Allocation((right, left))
    return Allocation((left, right))


MECHANISMS: dict[MechanismId, Mechanism] = {
    MechanismId.SIMPLE_EF: simple_ef,
    MechanismId.ROTATING_EF: rotating_ef,
    MechanismId.CONNECTED_PROP: connected_prop,
    MechanismId.CONNECTED_PROP_OPEN: connected_prop_open,
    MechanismId.MOVING_KNIFE: moving_knife,
    MechanismId.EVEN_PAZ: even_paz,
    MechanismId.CUT_AND_CHOOSE: cut_and_choose,
}

# Properties each mechanism promises on every valid profile.
GUARANTEES: dict[MechanismId, tuple[str, ...]] = {
    MechanismId.SIMPLE_EF: ("exact", "envy_free", "proportional", "entire"),
    MechanismId.ROTATING_EF: ("exact", "envy_free", "proportional", "entire"),
    MechanismId.CONNECTED_PROP: ("proportional", "connected", "entire"),
    MechanismId.CONNECTED_PROP_OPEN: ("proportional", "connected"),
    MechanismId.MOVING_KNIFE: ("proportional", "connected", "entire"),
    MechanismId.EVEN_PAZ: ("proportional", "connected", "entire"),
    MechanismId.CUT_AND_CHOOSE: ("proportional", "envy_free", "connected", "entire"),
}


def get_mechanism(mechanism: "MechanismId | str | Mechanism") -> Mechanism:
    if callable(mechanism) and not isinstance(mechanism, (str, MechanismId)):
        return mechanism
    try:
        return MECHANISMS[MechanismId(mechanism)]
    except ValueError:
        raise ValueError(f"unknown mechanism {mechanism!r}; choose from {[m.value for m in MechanismId]}") from None


def run(mechanism: "MechanismId | str | Mechanism", profile: Sequence[PiecewiseConstant]) -> Allocation:
    return get_mechanism(mechanism)(list(profile))

"""Piecewise-constant value densities on the unit cake [0, 1].

Every position, density and value is a :class:`fractions.Fraction`; nothing
in this module touches floating point.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Tuple, Union

Rational = Fraction
RationalLike = Union[Fraction, int, str]

ZERO = Fraction(0)
ONE = Fraction(1)


class ValuationError(ValueError):
    """Malformed density or an impossible query against one."""


class RequestExceedsRemaining(ValuationError):
    pass


class ZeroTotalValue(ValuationError):
    pass


def as_rational(value: RationalLike) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings; floats are refused."""
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, (Fraction, int)):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if not text or any(c in text for c in ".eE"):
            raise ValuationError(f"not an exact rational: {value!r}")
        return Fraction(text)
    raise TypeError(f"cannot use {type(value).__name__} as an exact rational")


def format_rational(q: Fraction) -> str:
    return str(q)


@dataclass(frozen=True)
class PiecewiseConstant:
    """A density that is constant on each cell ``[b_k, b_{k+1})``.

    The last cell is closed at 1.  Construction canonicalizes: adjacent cells
    with equal density are merged, so every interior breakpoint is a genuine
    discontinuity.
    """

    breakpoints: Tuple[Fraction, ...]
    densities: Tuple[Fraction, ...]

    def __post_init__(self) -> None:
        bps = tuple(as_rational(b) for b in self.breakpoints)
        dens = tuple(as_rational(d) for d in self.densities)
        if len(bps) < 2 or bps[0] != ZERO or bps[-1] != ONE:
            raise ValuationError("breakpoints must start at 0 and end at 1")
        if any(a >= b for a, b in zip(bps, bps[1:])):
            raise ValuationError("breakpoints must be strictly ascending")
        if len(dens) != len(bps) - 1:
            raise ValuationError("need exactly one density per cell")
        if any(d < 0 for d in dens):
            raise ValuationError("densities must be nonnegative")

        merged_bps = [bps[0]]
        merged_dens: list[Fraction] = []
        for right, d in zip(bps[1:], dens):
            if merged_dens and merged_dens[-1] == d:
                merged_bps[-1] = right
            else:
                merged_dens.append(d)
                merged_bps.append(right)
        object.__setattr__(self, "breakpoints", tuple(merged_bps))
        object.__setattr__(self, "densities", tuple(merged_dens))

    @classmethod
    def uniform(cls, density: RationalLike = 1) -> "PiecewiseConstant":
        return cls((ZERO, ONE), (as_rational(density),))

    @classmethod
    def from_cells(cls, cells: Iterable[Tuple[RationalLike, RationalLike, RationalLike]]) -> "PiecewiseConstant":
        """Build from ``(left, right, density)`` triples that tile [0, 1] in order."""
        cells = [(as_rational(a), as_rational(b), as_rational(d)) for a, b, d in cells]
        for (_, b, _), (a, _, _) in zip(cells, cells[1:]):
            if a != b:
                raise ValuationError("cells must tile [0, 1] without gaps")
        bps = [cells[0][0]] + [b for _, b, _ in cells]
        return cls(tuple(bps), tuple(d for _, _, d in cells))

    @property
    def cells(self) -> Tuple[Tuple[Fraction, Fraction, Fraction], ...]:
        return tuple(zip(self.breakpoints, self.breakpoints[1:], self.densities))

    def hungry(self) -> bool:
        return all(d > 0 for d in self.densities)

    def total(self) -> Fraction:
        return integrate(self, ZERO, ONE)

    def density_at(self, x: RationalLike) -> Fraction:
        x = as_rational(x)
        if not ZERO <= x <= ONE:
            raise ValuationError(f"{x} lies outside the cake")
        for a, b, d in self.cells:
            if a <= x < b:
                return d
        return self.densities[-1]

    def to_json(self) -> dict:
        return {
            "breakpoints": [format_rational(b) for b in self.breakpoints],
            "densities": [format_rational(d) for d in self.densities],
        }

    @classmethod
    def from_json(cls, data: dict) -> "PiecewiseConstant":
        try:
            return cls(tuple(data["breakpoints"]), tuple(data["densities"]))
        except (KeyError, TypeError, ZeroDivisionError) as exc:
            raise ValuationError(f"bad density JSON: {exc}") from exc


Profile = Sequence[PiecewiseConstant]


def integrate(f: PiecewiseConstant, a: RationalLike, b: RationalLike) -> Fraction:
    """Integral of ``f`` over ``[a, b]``; zero when ``b <= a``."""
    a, b = as_rational(a), as_rational(b)
    if not (ZERO <= a <= ONE and ZERO <= b <= ONE):
        raise ValuationError(f"[{a}, {b}] is not inside [0, 1]")
    total = ZERO
    if b <= a:
        return total
    for lo, hi, d in f.cells:
        if hi <= a:
            continue
        if lo >= b:
            break
        total += d * (min(hi, b) - max(lo, a))
    return total


def evaluate(f: PiecewiseConstant, piece: Iterable[Tuple[RationalLike, RationalLike]]) -> Fraction:
    """Value of a piece, given as disjoint ``(left, right)`` intervals."""
    return sum((integrate(f, a, b) for a, b in piece), ZERO)


def cut(f: PiecewiseConstant, x: RationalLike, r: RationalLike) -> Fraction:
    """Leftmost ``y >= x`` with ``integrate(f, x, y) == r``.

    Zero-density plateaus are never crossed once the target is met, which
    keeps marks deterministic for densities that are not hungry.
    """
    x, r = as_rational(x), as_rational(r)
    if not ZERO <= x <= ONE:
        raise ValuationError(f"cut start {x} lies outside the cake")
    if r < 0:
        raise ValuationError("requested value must be nonnegative")
    remaining = integrate(f, x, ONE)
    if r > remaining:
        raise RequestExceedsRemaining(f"requested {r} but only {remaining} remains right of {x}")
    acc = ZERO
    pos = x
    for lo, hi, d in f.cells:
        if hi <= x:
            continue
        if acc == r:
            return pos
        start = max(lo, x)
        if d > 0:
            gain = d * (hi - start)
            if acc + gain >= r:
                return start + (r - acc) / d
            acc += gain
        pos = hi
    return pos


def discontinuities(f: PiecewiseConstant) -> list[Fraction]:
    return list(f.breakpoints[1:-1])


def mark_points(f: PiecewiseConstant, n: int) -> list[Fraction]:
    """Leftmost marks ``x_1 <= ... <= x_{n-1}`` splitting ``f`` into n equal-value spans."""
    if n < 1:
        raise ValueError("n must be positive")
    total = f.total()
    if total == 0:
        raise ZeroTotalValue("density has zero total value")
    share = total / n
    return [cut(f, ZERO, share * j) for j in range(1, n)]


def ell(n: int) -> PiecewiseConstant:
    """Density 3/2, then 1/2 on the first 1/n of the cake, 1 afterwards."""
    if n < 2:
        raise ValueError("ell(n) needs n >= 2")
    half = Fraction(1, 2 * n)
    return PiecewiseConstant(
        (ZERO, half, Fraction(1, n), ONE),
        (Fraction(3, 2), Fraction(1, 2), ONE),
    )


def rr(n: int) -> PiecewiseConstant:
    """Mirror image of :func:`ell` about 1/2."""
    if n < 2:
        raise ValueError("rr(n) needs n >= 2")
    return reflect(ell(n))


def reflect(f: PiecewiseConstant) -> PiecewiseConstant:
    bps = tuple(ONE - b for b in reversed(f.breakpoints))
    return PiecewiseConstant(bps, tuple(reversed(f.densities)))


def step_density(points: Sequence[RationalLike], levels: Sequence[RationalLike]) -> PiecewiseConstant:
    """Density with the given interior ``points`` and one level per resulting cell."""
    bps = (ZERO, *(as_rational(p) for p in points), ONE)
    return PiecewiseConstant(bps, tuple(as_rational(v) for v in levels))

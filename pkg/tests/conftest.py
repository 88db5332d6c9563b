from fractions import Fraction

import pytest
from hypothesis import strategies as st

from cakecut.valuation import PiecewiseConstant, step_density

GRID = 24


def oracle_value(f, intervals):
    """Integrate by splitting at every endpoint and sampling the density at midpoints.

    Deliberately avoids cakecut.valuation.integrate.
    """
    total = Fraction(0)
    for a, b in intervals:
        a, b = Fraction(a), Fraction(b)
        cuts = sorted({a, b, *(p for p in f.breakpoints if a < p < b)})
        for lo, hi in zip(cuts, cuts[1:]):
            total += f.density_at((lo + hi) / 2) * (hi - lo)
    return total


def oracle_cut(f, x, r, iterations=80):
    """Bisection on rationals for the leftmost y with value r on [x, y]."""
    lo, hi = Fraction(x), Fraction(1)
    for _ in range(iterations):
        mid = (lo + hi) / 2
        if oracle_value(f, [(x, mid)]) >= r:
            hi = mid
        else:
            lo = mid
    return lo, hi


def oracle_measure(intervals, grid=GRID):
    """Length of a union of grid-aligned intervals, by counting grid cells."""
    count = 0
    for k in range(grid):
        mid = Fraction(2 * k + 1, 2 * grid)
        if any(Fraction(a) <= mid < Fraction(b) for a, b in intervals):
            count += 1
    return Fraction(count, grid)


levels = st.sampled_from([Fraction(0), Fraction(1, 2), Fraction(1), Fraction(3, 2), Fraction(2), Fraction(7, 3)])
positive_levels = st.sampled_from([Fraction(1, 2), Fraction(1), Fraction(3, 2), Fraction(2), Fraction(7, 3)])


@st.composite
def densities(draw, hungry=False, grid=GRID, max_points=5):
    points = draw(st.lists(st.integers(1, grid - 1), max_size=max_points, unique=True))
    points = sorted(Fraction(p, grid) for p in points)
    lv = positive_levels if hungry else levels
    dens = draw(st.lists(lv, min_size=len(points) + 1, max_size=len(points) + 1))
    if not any(dens):
        dens[0] = Fraction(1)
    return step_density(points, dens)


@st.composite
def grid_intervals(draw, grid=GRID, max_size=4):
    raw = draw(st.lists(st.tuples(st.integers(0, grid), st.integers(0, grid)), max_size=max_size))
    return [(Fraction(min(a, b), grid), Fraction(max(a, b), grid)) for a, b in raw]


@pytest.fixture
def uniform():
    return PiecewiseConstant.uniform()


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        ok, detail = results[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")

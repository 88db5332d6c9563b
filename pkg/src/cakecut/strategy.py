"""Misreports, their classification, and the known manipulation constructions.

Risk-averse truthfulness quantifies over every possible opponent profile.
Here the quantifier ranges over an explicit finite family, so a
``WRAT_VIOLATION`` verdict is a genuine counterexample while ``DOMINATED`` or
a deterred verdict is only evidence about the family that was tried.
"""

from __future__ import annotations

import enum
import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Tuple

from .allocation import Allocation
from .mechanisms import MechanismId, get_mechanism
from .valuation import (
    ONE,
    ZERO,
    PiecewiseConstant,
    RationalLike,
    as_rational,
    discontinuities,
    ell,
    evaluate,
    rr,
    step_density,
)

Opponents = Tuple[PiecewiseConstant, ...]


class StrategyError(ValueError):
    pass


class ProfileMismatch(StrategyError):
    pass


class EpsOutOfRange(StrategyError):
    pass


class NotApplicable(StrategyError):
    pass


class EpsTooLarge(StrategyError):
    pass


class SearchSpaceEmpty(StrategyError):
    pass


class Verdict(str, enum.Enum):
    DOMINATED = "Dominated"
    RAT_DETERRED = "RAT_Deterred"
    WRAT_DETERRED_ONLY = "WRAT_Deterred_Only"
    WRAT_VIOLATION = "WRAT_Violation"


@dataclass(frozen=True)
class Scenario:
    """One agent weighing a single misreport against a family of opponents."""

    mechanism: MechanismId
    agent: int
    true_f: PiecewiseConstant
    deviation_f: PiecewiseConstant
    opponent_profiles: Tuple[Opponents, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "mechanism", MechanismId(self.mechanism))
        object.__setattr__(self, "opponent_profiles", tuple(tuple(p) for p in self.opponent_profiles))
        if self.true_f == self.deviation_f:
            raise StrategyError("the deviation must differ from the true density")
        if not self.opponent_profiles:
            raise StrategyError("need at least one opponent profile")
        sizes = {len(p) for p in self.opponent_profiles}
        if len(sizes) != 1:
            raise ProfileMismatch(f"opponent profiles disagree on the number of agents: {sorted(sizes)}")
        if not 0 <= self.agent <= sizes.pop():
            raise ProfileMismatch(f"agent index {self.agent} does not fit the profile size")

    @property
    def n(self) -> int:
        return len(self.opponent_profiles[0]) + 1

    def profile(self, opponents: Opponents, report: PiecewiseConstant) -> list[PiecewiseConstant]:
        others = list(opponents)
        return others[: self.agent] + [report] + others[self.agent :]

    def with_profiles(self, profiles: Sequence[Opponents]) -> "Scenario":
        return Scenario(self.mechanism, self.agent, self.true_f, self.deviation_f, tuple(profiles))

    def to_json(self) -> dict:
        return {
            "mechanism": self.mechanism.value,
            "agent": self.agent,
            "true_f": self.true_f.to_json(),
            "deviation_f": self.deviation_f.to_json(),
            "opponent_profiles": [[f.to_json() for f in p] for p in self.opponent_profiles],
        }

    @classmethod
    def from_json(cls, data: dict) -> "Scenario":
        try:
            return cls(
                mechanism=MechanismId(data["mechanism"]),
                agent=int(data["agent"]),
                true_f=PiecewiseConstant.from_json(data["true_f"]),
                deviation_f=PiecewiseConstant.from_json(data["deviation_f"]),
                opponent_profiles=tuple(
                    tuple(PiecewiseConstant.from_json(f) for f in p) for p in data["opponent_profiles"]
                ),
            )
        except (KeyError, TypeError) as exc:
            raise StrategyError(f"bad scenario JSON: {exc}") from exc


@dataclass(frozen=True)
class Outcome:
    truthful: Fraction
    deviating: Fraction
    truthful_allocation: Allocation = field(repr=False)
    deviating_allocation: Allocation = field(repr=False)


def outcome(scenario: Scenario, opponents: Opponents) -> Outcome:
    """Both reports against one opponent tuple, valued with the TRUE density."""
    mech = get_mechanism(scenario.mechanism)
    i = scenario.agent
    honest = mech(scenario.profile(opponents, scenario.true_f))
    lying = mech(scenario.profile(opponents, scenario.deviation_f))
    return Outcome(
        truthful=evaluate(scenario.true_f, honest[i]),
        deviating=evaluate(scenario.true_f, lying[i]),
        truthful_allocation=honest,
        deviating_allocation=lying,
    )


@dataclass(frozen=True)
class DeviationCertificate:
    scenario: Scenario
    verdict: Verdict
    proportional_value: Fraction
    gain_index: Optional[int] = None
    risk_index: Optional[int] = None
    values: dict = field(default_factory=dict)

    @property
    def gain_profile(self) -> Optional[Opponents]:
        return None if self.gain_index is None else self.scenario.opponent_profiles[self.gain_index]

    @property
    def risk_profile(self) -> Optional[Opponents]:
        return None if self.risk_index is None else self.scenario.opponent_profiles[self.risk_index]

    @property
    def gain(self) -> Optional[Fraction]:
        if self.gain_index is None:
            return None
        return self.values["gain_deviating"] - self.values["gain_truthful"]

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "proportional_value": str(self.proportional_value),
            "gain_index": self.gain_index,
            "risk_index": self.risk_index,
            "gain": None if self.gain is None else str(self.gain),
            "values": {k: str(v) for k, v in self.values.items()},
            "scenario": self.scenario.to_json(),
        }


def classify_deviation(scenario: Scenario) -> DeviationCertificate:
    """Sort a misreport into one of the four :class:`Verdict` buckets.

    The certificate points at the first profile in the family showing a gain
    and the first one showing the deterring loss.
    """
    threshold = scenario.true_f.total() / scenario.n
    results = [outcome(scenario, opp) for opp in scenario.opponent_profiles]
    diffs = [r.deviating - r.truthful for r in results]

    gain_index = next((k for k, d in enumerate(diffs) if d > 0), None)

    below = [k for k, r in enumerate(results) if r.deviating < threshold]
    risk_index = None
    if gain_index is None:
        verdict = Verdict.DOMINATED
        if below:
            risk_index = below[0]
    elif below:
        verdict = Verdict.RAT_DETERRED
        risk_index = below[0]
    elif min(diffs) < 0:
        verdict = Verdict.WRAT_DETERRED_ONLY
        risk_index = next(k for k, d in enumerate(diffs) if d < 0)
    else:
        verdict = Verdict.WRAT_VIOLATION

    values = {}
    if gain_index is not None:
        values["gain_truthful"] = results[gain_index].truthful
        values["gain_deviating"] = results[gain_index].deviating
    if risk_index is not None:
        values["risk_truthful"] = results[risk_index].truthful
        values["risk_deviating"] = results[risk_index].deviating
    return DeviationCertificate(scenario, verdict, threshold, gain_index, risk_index, values)


def replay(certificate: DeviationCertificate) -> bool:
    """Re-run the mechanism and confirm every recorded utility and the verdict."""
    s = certificate.scenario
    for tag, index in (("gain", certificate.gain_index), ("risk", certificate.risk_index)):
        if index is None:
            continue
        fresh = outcome(s, s.opponent_profiles[index])
        if fresh.truthful != certificate.values[f"{tag}_truthful"]:
            return False
        if fresh.deviating != certificate.values[f"{tag}_deviating"]:
            return False
    if certificate.gain_index is not None and not certificate.gain > 0:
        return False
    if certificate.verdict is Verdict.RAT_DETERRED:
        if not certificate.values["risk_deviating"] < certificate.proportional_value:
            return False
    return classify_deviation(s).verdict is certificate.verdict


def sample_profiles(
    n_opponents: int,
    count: int,
    seed: int = 0,
    grid: int = 12,
    levels: Sequence[RationalLike] = (Fraction(1, 2), 1, Fraction(3, 2), 2),
    max_points: int = 3,
) -> list[Opponents]:
    """Random hungry opponent tuples on a ``1/grid`` breakpoint lattice.

    Each density is rescaled so the whole cake is worth exactly 1.
    """
    rng = random.Random(seed)
    levels = [as_rational(v) for v in levels]
    out = []
    for _ in range(count):
        out.append(tuple(random_density(rng, grid, levels, max_points) for _ in range(n_opponents)))
    return out


def random_density(rng: random.Random, grid: int = 12, levels: Sequence[Fraction] = (), max_points: int = 3) -> PiecewiseConstant:
    levels = list(levels) or [Fraction(1, 2), ONE, Fraction(3, 2), Fraction(2)]
    k = rng.randint(0, max_points)
    points = sorted(rng.sample(range(1, grid), k))
    dens = [rng.choice(levels) for _ in range(k + 1)]
    f = step_density([Fraction(p, grid) for p in points], dens)
    total = f.total()
    return PiecewiseConstant(f.breakpoints, tuple(d / total for d in f.densities))


def _indicator(lo: Fraction, hi: Fraction) -> PiecewiseConstant:
    """Density 1 on [lo, hi), 0 elsewhere."""
    points, levels = [], []
    if lo > 0:
        points.append(lo)
        levels.append(ZERO)
    levels.append(ONE)
    if hi < 1:
        points.append(hi)
        levels.append(ZERO)
    return step_density(points, levels)


def movingknife_counterexample(n: int, extra_profiles: Sequence[Opponents] = ()) -> Scenario:
    """Uniform agent 0 claims ``ell(n)``; one opponent wants only the first 1/n.

    The remaining opponents only want the cake right of 1/n.  With n = 2
    agent 0 is served last either way, so this profile shows no gain there.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    cut_at = Fraction(1, n)
    opponents = (_indicator(ZERO, cut_at),) + tuple(_indicator(cut_at, ONE) for _ in range(n - 2))
    return Scenario(
        MechanismId.MOVING_KNIFE,
        0,
        PiecewiseConstant.uniform(),
        ell(n),
        (opponents, *extra_profiles),
    )


def evenpaz_counterexample(eps: RationalLike, extra_profiles: Sequence[Opponents] = ()) -> Scenario:
    """Five agents; uniform agent 0 claims ``rr(5)``.

    Agent 1 only values ``[0, eps)`` and agents 2 to 4 only ``[1 - eps, 1]``.
    """
    eps = as_rational(eps)
    if not 0 < eps < Fraction(1, 10):
        raise EpsOutOfRange(f"eps must lie in (0, 1/10), got {eps}")
    left = _indicator(ZERO, eps)
    right = _indicator(ONE - eps, ONE)
    opponents = (left, right, right, right)
    return Scenario(
        MechanismId.EVEN_PAZ,
        0,
        PiecewiseConstant.uniform(),
        rr(5),
        (opponents, *extra_profiles),
    )


def simpleef_counterexample(n: int, extra_profiles: Sequence[Opponents] = ()) -> Scenario:
    """Agent 0 values the first 1/n at 1 and the rest at 1/2, but reports uniform."""
    if n < 2:
        raise ValueError("need n >= 2")
    true_f = step_density([Fraction(1, n)], [ONE, Fraction(1, 2)])
    opponents = tuple(PiecewiseConstant.uniform() for _ in range(n - 1))
    return Scenario(
        MechanismId.SIMPLE_EF,
        0,
        true_f,
        PiecewiseConstant.uniform(),
        (opponents, *extra_profiles),
    )


def _alternating(points: Sequence[Fraction]) -> PiecewiseConstant:
    """Hungry density with a genuine discontinuity at every given point."""
    levels = [ONE if k % 2 == 0 else Fraction(2) for k in range(len(points) + 1)]
    return step_density(points, levels)


def rotatingef_risk_profile(
    true_f: PiecewiseConstant,
    deviation_f: PiecewiseConstant,
    n: int,
    eps: RationalLike,
    agent: int = 0,
) -> Opponents:
    """Opponents that punish a report which drops one of the true discontinuities.

    Pick the first true discontinuity ``t`` that the report omits and open a
    window of width ``n * eps`` around it that becomes a single cell of
    :func:`~cakecut.mechanisms.rotating_ef`.  The window is placed so the
    deviator's slice is the eps-wide sliver on the cheap side of ``t``;
    every other cell is constant for the deviator and pays exactly 1/n of it.
    Filler breakpoints left of the window shift the cell index until the
    rotation lands on that sliver.
    """
    eps = as_rational(eps)
    if n < 2:
        raise ValueError("need n >= 2")
    if not 0 <= agent < n:
        raise ValueError("agent index out of range")
    if eps <= 0:
        raise EpsTooLarge("eps must be positive")
    true_points = discontinuities(true_f)
    reported = set(discontinuities(deviation_f))
    dropped = [t for t in true_points if t not in reported]
    if not dropped:
        raise NotApplicable("the report only refines the true density; it always pays exactly 1/n")
    t = dropped[0]
    k = true_f.breakpoints.index(t)
    cheap_left = true_f.densities[k - 1] < true_f.densities[k]
    if cheap_left:
        lo, hi = t - eps, t + (n - 1) * eps
        slot = 0
    else:
        lo, hi = t - (n - 1) * eps, t + eps
        slot = n - 1
    others = (set(true_points) | reported) - {t}
    if lo <= 0 or hi >= 1 or any(lo < p < hi for p in others):
        raise EpsTooLarge(f"window [{lo}, {hi}) around {t} hits another breakpoint or the cake's edge")

    base = sorted(others | {lo, hi})
    before = [p for p in base if p < lo]
    # cell j starts at the j-th point, with x_0 = 0
    index = len(before) + 1
    # the deviator takes slice (agent + j) mod n in cell j
    need = (slot - agent - index) % n
    anchor = before[-1] if before else ZERO
    fillers = [anchor + (lo - anchor) * k / (need + 1) for k in range(1, need + 1)]
    points = sorted(set(base) | set(fillers))

    opponents = [PiecewiseConstant.uniform() for _ in range(n - 1)]
    opponents[0] = _alternating(points)
    opponents = tuple(opponents)

    check = Scenario(MechanismId.ROTATING_EF, agent, true_f, deviation_f, (opponents,))
    got = outcome(check, opponents).deviating
    if not got < true_f.total() / n:
        raise AssertionError(f"risk construction failed on replay: deviator still gets {got}")
    return opponents


DEFAULT_GRID = (Fraction(1, 4), Fraction(1, 2), Fraction(3, 4))
DEFAULT_LEVELS = (Fraction(1, 2), ONE, Fraction(2))


def enumerate_reports(grid: Sequence[RationalLike], levels: Sequence[RationalLike]):
    """Every canonical density with breakpoints from ``grid`` and cell values from ``levels``."""
    grid = sorted({as_rational(g) for g in grid})
    levels = [as_rational(v) for v in levels]
    if any(not 0 < g < 1 for g in grid):
        raise StrategyError("grid points must lie strictly inside (0, 1)")
    if not levels or any(v < 0 for v in levels):
        raise StrategyError("levels must be a nonempty list of nonnegative rationals")
    seen = set()
    for k in range(len(grid) + 1):
        for points in itertools.combinations(grid, k):
            for dens in itertools.product(levels, repeat=k + 1):
                if not any(dens):
                    continue
                f = step_density(points, dens)
                if f in seen:
                    continue
                seen.add(f)
                yield f


def brute_force_best_response(
    mechanism: "MechanismId | str",
    agent: int,
    true_f: PiecewiseConstant,
    opponents: Opponents,
    grid: Sequence[RationalLike] = DEFAULT_GRID,
    levels: Sequence[RationalLike] = DEFAULT_LEVELS,
) -> tuple[PiecewiseConstant, Fraction]:
    """Best report for ``agent`` over a finite grid, judged by the true density.

    The truthful report always competes and wins ties; otherwise the first
    report in enumeration order wins.
    """
    mech = get_mechanism(mechanism)
    others = list(opponents)

    def utility(report: PiecewiseConstant) -> Fraction:
        profile = others[:agent] + [report] + others[agent:]
        return evaluate(true_f, mech(profile)[agent])

    best_f, best_u = true_f, utility(true_f)
    tried = 0
    for report in enumerate_reports(grid, levels):
        tried += 1
        u = utility(report)
        if u > best_u:
            best_f, best_u = report, u
    if tried == 0:
        raise SearchSpaceEmpty("no report fits the grid and levels")
    return best_f, best_u


def rotatingef_counterexample(
    n: int,
    eps: RationalLike = Fraction(1, 100),
    extra_profiles: Sequence[Opponents] = (),
) -> Scenario:
    """Agent 0 hides her jump from 1/2 to 3/2 at t = 1/2 by reporting uniform.

    Against a single opponent breakpoint at 1/4 the lie pays off for small n,
    but the opponents built by :func:`rotatingef_risk_profile` push her
    below her proportional share.
    """
    true_f = step_density([Fraction(1, 2)], [Fraction(1, 2), Fraction(3, 2)])
    deviation = PiecewiseConstant.uniform()
    lure = (_alternating([Fraction(1, 4)]),) + tuple(PiecewiseConstant.uniform() for _ in range(n - 2))
    risk = rotatingef_risk_profile(true_f, deviation, n, eps)
    return Scenario(MechanismId.ROTATING_EF, 0, true_f, deviation, (lure, risk, *extra_profiles))

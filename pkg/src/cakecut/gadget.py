"""Adaptive six-instance attack on two-agent proportional mechanisms.

:func:`run_gadget` feeds a black-box mechanism the instances F1..F6, each
built from the pieces the mechanism handed out earlier.  Any deterministic
mechanism either breaks proportionality on one of them or lets some agent
gain by reporting the density of a neighbouring instance.  The driver finds
which, and only reports a violation after reproducing it with fresh calls.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .allocation import Allocation, AuditReport, Piece, audit
from .mechanisms import get_mechanism
from .valuation import ONE, ZERO, PiecewiseConstant, RationalLike, as_rational, evaluate

log = logging.getLogger(__name__)

BlackBox = Callable[[Sequence[PiecewiseConstant]], Allocation]

HALF = Fraction(1, 2)
QUARTER = Fraction(1, 4)
DEFAULT_EPS = Fraction(1, 100)


class GadgetError(ValueError):
    pass


class EpsTooLarge(GadgetError):
    pass


class StateIncomplete(GadgetError):
    pass


class Verdict(str, enum.Enum):
    PROPORTIONALITY_VIOLATION = "ProportionalityViolation"
    TRUTHFULNESS_VIOLATION = "TruthfulnessViolation"
    FORCED_STATE_DIVERGED = "ForcedStateDiverged"


def final_inequality_check(eps: RationalLike) -> bool:
    """True when agent 1's best case on F6 falls short of what F5 guarantees her."""
    eps = as_rational(eps)
    if not 0 < eps < 1:
        raise GadgetError("eps must lie in (0, 1)")
    return (1 + 2 * eps) / (8 - 8 * eps) + eps < QUARTER + eps / 4


def eps_is_small_enough(eps: RationalLike) -> bool:
    eps = as_rational(eps)
    return 0 < eps < HALF and final_inequality_check(eps)


@dataclass
class GadgetState:
    eps: Fraction
    X1: Optional[Piece] = None
    X2: Optional[Piece] = None
    X11: Optional[Piece] = None
    X12: Optional[Piece] = None
    X21: Optional[Piece] = None
    X22: Optional[Piece] = None
    instance_outputs: dict = field(default_factory=dict)

    @classmethod
    def canonical(cls, eps: RationalLike = DEFAULT_EPS) -> "GadgetState":
        """The layout a mechanism splitting at 1/2 and then at the quarters would produce."""
        q = Piece.interval
        return cls(
            eps=as_rational(eps),
            X1=q(0, HALF),
            X2=q(HALF, 1),
            X11=q(0, QUARTER),
            X12=q(QUARTER, HALF),
            X21=q(HALF, Fraction(3, 4)),
            X22=q(Fraction(3, 4), 1),
        )


def piecewise_on(parts: Sequence[tuple]) -> PiecewiseConstant:
    """Density equal to ``level`` on each ``piece`` of a partition of [0, 1]."""
    cells = []
    for piece, level in parts:
        cells.extend((a, b, as_rational(level)) for a, b in piece)
    cells.sort()
    covered = sum((b - a for a, b, _ in cells), ZERO)
    if covered != ONE:
        raise GadgetError(f"pieces cover length {covered} of the cake, not 1")
    points = [ZERO]
    levels = []
    for a, b, level in cells:
        if a != points[-1]:
            raise GadgetError("pieces must partition the cake")
        points.append(b)
        levels.append(level)
    return PiecewiseConstant(tuple(points), tuple(levels))


def build_instances(state: GadgetState) -> dict[str, tuple[PiecewiseConstant, PiecewiseConstant]]:
    """Every instance the state can support so far, keyed ``"F1"`` .. ``"F6"``."""
    eps = state.eps
    uniform = PiecewiseConstant.uniform()
    out = {"F1": (uniform, uniform)}
    if state.X1 is None or state.X2 is None:
        return out
    X1, X2 = state.X1, state.X2
    f2_low_left = piecewise_on([(X1, eps), (X2, 1)])
    out["F2"] = (uniform, f2_low_left)
    out["F3"] = (piecewise_on([(X1, HALF), (X2, 1)]), f2_low_left)
    quarters = (state.X11, state.X12, state.X21, state.X22)
    if any(x is None for x in quarters):
        return out
    X11, X12, X21, X22 = quarters
    f1_spiked = piecewise_on([(X11, 1), (X12, eps), (X21, 2 * eps), (X22, eps)])
    f2_mostly_right = piecewise_on([(X11, 1 - eps), (X12, eps), (X2, 1)])
    out["F4"] = (f1_spiked, f2_low_left)
    out["F5"] = (uniform, f2_mostly_right)
    out["F6"] = (f1_spiked, f2_mostly_right)
    return out


def require_instance(state: GadgetState, name: str) -> tuple[PiecewiseConstant, PiecewiseConstant]:
    instances = build_instances(state)
    if name not in instances:
        raise StateIncomplete(f"{name} needs pieces that have not been recorded yet")
    return instances[name]


@dataclass(frozen=True)
class ProportionalityWitness:
    instance: str
    profile: tuple
    allocation: Allocation
    report: AuditReport

    def to_json(self) -> dict:
        return {
            "kind": "proportionality",
            "instance": self.instance,
            "profile": [f.to_json() for f in self.profile],
            "allocation": self.allocation.to_json(),
            "audit": self.report.to_json(),
        }


@dataclass(frozen=True)
class TruthfulnessWitness:
    """Agent ``agent`` with true profile ``profile`` gains by reporting ``deviation``."""

    instance: str
    target: str
    agent: int
    profile: tuple
    deviation: PiecewiseConstant
    truthful_allocation: Allocation
    deviating_allocation: Allocation
    truthful_value: Fraction
    deviating_value: Fraction

    @property
    def gain(self) -> Fraction:
        return self.deviating_value - self.truthful_value

    def to_json(self) -> dict:
        return {
            "kind": "truthfulness",
            "instance": self.instance,
            "deviates_to": self.target,
            "agent": self.agent,
            "profile": [f.to_json() for f in self.profile],
            "deviation": self.deviation.to_json(),
            "truthful_allocation": self.truthful_allocation.to_json(),
            "deviating_allocation": self.deviating_allocation.to_json(),
            "truthful_value": str(self.truthful_value),
            "deviating_value": str(self.deviating_value),
            "gain": str(self.gain),
        }


@dataclass(frozen=True)
class GadgetReport:
    verdict: Verdict
    stage: str
    certificate: object
    eps_used: Fraction
    instances: dict = field(default_factory=dict)
    allocations: dict = field(default_factory=dict)
    notes: tuple = ()

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "stage": self.stage,
            "eps_used": str(self.eps_used),
            "certificate": None if self.certificate is None else self.certificate.to_json(),
            "instances": {k: [f.to_json() for f in v] for k, v in self.instances.items()},
            "allocations": {k: v.to_json() for k, v in self.allocations.items()},
            "notes": list(self.notes),
        }


def verify_witness(mechanism: BlackBox, witness) -> bool:
    """Recompute a witness from scratch against ``mechanism``."""
    if isinstance(witness, ProportionalityWitness):
        fresh = mechanism(list(witness.profile))
        return fresh.same_as(witness.allocation) and not audit(witness.profile, fresh).proportional
    if isinstance(witness, TruthfulnessWitness):
        i = witness.agent
        truth = witness.profile[i]
        honest = mechanism(list(witness.profile))
        lying_profile = list(witness.profile)
        lying_profile[i] = witness.deviation
        lying = mechanism(lying_profile)
        return (
            evaluate(truth, honest[i]) == witness.truthful_value
            and evaluate(truth, lying[i]) == witness.deviating_value
            and witness.deviating_value > witness.truthful_value
        )
    return False


class _Driver:
    def __init__(self, mechanism: BlackBox, eps: Fraction):
        self.mechanism = mechanism
        self.state = GadgetState(eps=eps)
        self.notes: list[str] = []

    def call(self, name: str) -> Allocation:
        profile = require_instance(self.state, name)
        allocation = self.mechanism(list(profile))
        if not isinstance(allocation, Allocation) or len(allocation) != 2:
            raise GadgetError(f"mechanism returned {allocation!r} on {name}; expected a two-share Allocation")
        self.state.instance_outputs[name] = allocation
        return allocation

    def report(self, verdict: Verdict, stage: str, certificate) -> GadgetReport:
        return GadgetReport(
            verdict=verdict,
            stage=stage,
            certificate=certificate,
            eps_used=self.state.eps,
            instances=build_instances(self.state),
            allocations=dict(self.state.instance_outputs),
            notes=tuple(self.notes),
        )

    def proportional_or_report(self, name: str) -> Optional[GadgetReport]:
        profile = require_instance(self.state, name)
        allocation = self.state.instance_outputs[name]
        report = audit(profile, allocation)
        if report.proportional:
            return None
        witness = ProportionalityWitness(name, profile, allocation, report)
        if not verify_witness(self.mechanism, witness):
            raise GadgetError(f"mechanism is not deterministic on {name}")
        return self.report(Verdict.PROPORTIONALITY_VIOLATION, name, witness)

    def try_deviation(self, name: str, agent: int, target: str) -> Optional[TruthfulnessWitness]:
        """Agent ``agent`` of instance ``name`` reports her density from ``target``."""
        profile = require_instance(self.state, name)
        deviation = require_instance(self.state, target)[agent]
        honest = self.mechanism(list(profile))
        lying_profile = list(profile)
        lying_profile[agent] = deviation
        lying = self.mechanism(lying_profile)
        truth = profile[agent]
        witness = TruthfulnessWitness(
            instance=name,
            target=target,
            agent=agent,
            profile=profile,
            deviation=deviation,
            truthful_allocation=honest,
            deviating_allocation=lying,
            truthful_value=evaluate(truth, honest[agent]),
            deviating_value=evaluate(truth, lying[agent]),
        )
        if witness.gain > 0 and verify_witness(self.mechanism, witness):
            return witness
        return None

    def first_witness(self, stage: str, candidates) -> Optional[GadgetReport]:
        for name, agent, target in candidates:
            witness = self.try_deviation(name, agent, target)
            if witness is not None:
                log.debug("stage %s: agent %d of %s gains by reporting as in %s", stage, agent, name, target)
                return self.report(Verdict.TRUTHFULNESS_VIOLATION, stage, witness)
        return None

    def diverged(self, stage: str, detail: str) -> GadgetReport:
        self.notes.append(detail)
        self.notes.append("no witness reproduced; rerun with a smaller eps")
        return self.report(Verdict.FORCED_STATE_DIVERGED, stage, None)

    def run(self) -> GadgetReport:
        st = self.state
        # which deviations the argument uses, per stage
        witnesses = {
            "F2": [("F2", 1, "F1")],
            "F3": [("F2", 0, "F3")],
            "F4": [("F2", 0, "F4"), ("F4", 0, "F3")],
            "F5": [("F5", 1, "F2")],
        }
        tried: list = []

        # F1: with two uniform agents proportionality pins both lengths to 1/2
        A = self.call("F1")
        bad = self.proportional_or_report("F1")
        if bad:
            return bad
        st.X1, st.X2 = A[0], A[1]

        A = self.call("F2")
        bad = self.proportional_or_report("F2")
        if bad:
            return bad
        tried += witnesses["F2"]
        if not (A[0].same_as(st.X1) and A[1].same_as(st.X2)):
            return self.first_witness("F2", tried) or self.diverged("F2", "M(F2) differs from (X1, X2)")

        A = self.call("F3")
        bad = self.proportional_or_report("F3")
        if bad:
            return bad
        tried += witnesses["F3"]
        quarter_pieces = (A[0] & st.X1, A[1] & st.X1, A[0] & st.X2, A[1] & st.X2)
        if any(p.length != QUARTER for p in quarter_pieces):
            return self.first_witness("F3", tried) or self.diverged("F3", "M(F3) does not take a quarter from each half")
        st.X11, st.X12, st.X21, st.X22 = quarter_pieces

        A = self.call("F4")
        bad = self.proportional_or_report("F4")
        if bad:
            return bad
        tried += witnesses["F4"]
        if not (A[0].same_as(st.X11 | st.X21) and A[1].same_as(st.X12 | st.X22)):
            return self.first_witness("F4", tried) or self.diverged("F4", "M(F4) differs from M(F3)")

        A = self.call("F5")
        bad = self.proportional_or_report("F5")
        if bad:
            return bad
        tried += witnesses["F5"]
        if not (A[0].same_as(st.X1) and A[1].same_as(st.X2)):
            return self.first_witness("F5", tried) or self.diverged("F5", "M(F5) differs from (X1, X2)")

        A = self.call("F6")
        f1, f2 = require_instance(st, "F6")
        bound = QUARTER + st.eps / 4
        if not (A[1] & st.X2).length <= bound:
            found = self.first_witness("F6/i", [("F4", 1, "F6")])
            if found:
                return found
        if not evaluate(f1, A[0]) >= bound:
            found = self.first_witness("F6/ii", [("F6", 0, "F5")])
            if found:
                return found
        bad = self.proportional_or_report("F6")
        if bad:
            return self.report(bad.verdict, "F6/iii", bad.certificate)
        return self.first_witness("F6", tried + [("F4", 1, "F6"), ("F6", 0, "F5")]) or self.diverged(
            "F6", "M(F6) satisfies all three constraints, which the arithmetic rules out"
        )


def run_gadget(mechanism, eps: RationalLike = DEFAULT_EPS) -> GadgetReport:
    """Drive ``mechanism`` through the six instances and return a checked verdict.

    ``mechanism`` is a :class:`~cakecut.mechanisms.MechanismId`, its string
    name, or any callable mapping a two-density profile to an Allocation.
    """
    eps = as_rational(eps)
    if not eps_is_small_enough(eps):
        raise EpsTooLarge(f"eps = {eps} is too large for the argument to close")
    return _Driver(get_mechanism(mechanism), eps).run()

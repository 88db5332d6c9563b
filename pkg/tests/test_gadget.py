import json
from fractions import Fraction as F

import pytest

from cakecut.allocation import Allocation, Piece, audit
from cakecut.gadget import (
    EpsTooLarge,
    GadgetState,
    ProportionalityWitness,
    StateIncomplete,
    TruthfulnessWitness,
    Verdict,
    _Driver,
    build_instances,
    eps_is_small_enough,
    final_inequality_check,
    require_instance,
    run_gadget,
    verify_witness,
)
from cakecut.mechanisms import MechanismId, moving_knife
from cakecut.valuation import PiecewiseConstant, evaluate, step_density

half, quarter = F(1, 2), F(1, 4)
iv = Piece.interval
PROPORTIONAL = [
    MechanismId.MOVING_KNIFE,
    MechanismId.EVEN_PAZ,
    MechanismId.CONNECTED_PROP,
    MechanismId.ROTATING_EF,
    MechanismId.SIMPLE_EF,
    MechanismId.CUT_AND_CHOOSE,
    MechanismId.CONNECTED_PROP_OPEN,
]


def dictator(profile):
    return Allocation((Piece.whole(),) + tuple(Piece() for _ in profile[1:]))


def lookup(table, fallback=moving_knife):
    def mechanism(profile):
        return table.get(tuple(profile)) or fallback(profile)

    return mechanism


class TestInstances:
    def test_canonical_f2(self):
        eps = F(1, 100)
        inst = build_instances(GadgetState.canonical(eps))
        f1, f2 = inst["F2"]
        assert f1 == PiecewiseConstant.uniform()
        assert f2 == step_density([half], [eps, 1])

    def test_canonical_f6_totals(self):
        eps = F(1, 100)
        f1, f2 = build_instances(GadgetState.canonical(eps))["F6"]
        assert f1.total() == quarter + eps / 4 + eps / 2 + eps / 4 == quarter + eps
        assert f2.total() == (1 - eps) / 4 + eps / 4 + half == F(3, 4)

    def test_incomplete_state(self):
        state = GadgetState(eps=F(1, 100))
        assert set(build_instances(state)) == {"F1"}
        with pytest.raises(StateIncomplete):
            require_instance(state, "F2")
        state.X1, state.X2 = iv(0, half), iv(half, 1)
        assert set(build_instances(state)) == {"F1", "F2", "F3"}
        with pytest.raises(StateIncomplete):
            require_instance(state, "F4")

    def test_scattered_pieces(self):
        state = GadgetState(eps=F(1, 10), X1=Piece(((0, quarter), (F(3, 4), 1))), X2=iv(quarter, F(3, 4)))
        _, f2 = require_instance(state, "F2")
        assert f2.densities == (F(1, 10), 1, F(1, 10))


class TestEps:
    def test_final_inequality(self):
        assert final_inequality_check(F(1, 100))
        assert not final_inequality_check(half)

    def test_threshold_region(self):
        assert eps_is_small_enough(F(1, 1000))
        assert not eps_is_small_enough(F(1, 5))
        assert not eps_is_small_enough(0)

    def test_run_rejects_large_eps(self):
        with pytest.raises(EpsTooLarge):
            run_gadget(MechanismId.SIMPLE_EF, half)


class TestRun:
    @pytest.mark.parametrize("mech", PROPORTIONAL)
    @pytest.mark.parametrize("eps", [F(1, 100), F(1, 1000)])
    def test_proportional_mechanisms_leak(self, mech, eps):
        report = run_gadget(mech, eps)
        assert report.verdict is Verdict.TRUTHFULNESS_VIOLATION
        w = report.certificate
        assert isinstance(w, TruthfulnessWitness)
        assert w.gain > 0
        assert verify_witness(moving_knife if mech is MechanismId.MOVING_KNIFE else _mech(mech), w)
        assert report.eps_used == eps

    def test_stage_is_stable_as_eps_shrinks(self):
        for mech in PROPORTIONAL:
            assert run_gadget(mech, F(1, 100)).stage == run_gadget(mech, F(1, 1000)).stage

    def test_dictator(self):
        report = run_gadget(dictator)
        assert report.verdict is Verdict.PROPORTIONALITY_VIOLATION
        assert report.stage == "F1"
        assert isinstance(report.certificate, ProportionalityWitness)
        assert verify_witness(dictator, report.certificate)

    def test_forced_layout_reaches_f6(self):
        eps = F(1, 100)
        state = GadgetState.canonical(eps)
        inst = build_instances(state)
        halves = Allocation((state.X1, state.X2))
        crossed = Allocation((state.X11 | state.X21, state.X12 | state.X22))
        table = {
            inst["F1"]: halves,
            inst["F2"]: halves,
            inst["F3"]: crossed,
            inst["F4"]: crossed,
            inst["F5"]: halves,
            inst["F6"]: Allocation((state.X11, state.X12 | state.X2)),
        }
        mech = lookup(table)
        report = run_gadget(mech, eps)
        assert report.verdict is Verdict.TRUTHFULNESS_VIOLATION
        # agent 2 holds all of X2 on F6, so agent 2 of F4 profits from reporting as in F6
        assert report.stage == "F6/i"
        w = report.certificate
        assert (w.instance, w.agent, w.target) == ("F4", 1, "F6")
        assert (w.truthful_value, w.deviating_value) == (quarter + eps / 4, half + eps / 4)
        assert set(report.allocations) == {"F1", "F2", "F3", "F4", "F5", "F6"}
        assert verify_witness(mech, report.certificate)

    def test_f6_agent_one_short(self):
        eps = F(1, 100)
        state = GadgetState.canonical(eps)
        inst = build_instances(state)
        halves = Allocation((state.X1, state.X2))
        crossed = Allocation((state.X11 | state.X21, state.X12 | state.X22))
        table = {inst[k]: halves for k in ("F1", "F2", "F5")}
        table.update({inst[k]: crossed for k in ("F3", "F4")})
        # agent 2 keeps only a quarter of X2 and makes up the rest inside X11
        table[inst["F6"]] = Allocation((iv(F(1, 8), quarter) | state.X22, iv(0, F(1, 8)) | state.X12 | state.X21))
        report = run_gadget(lookup(table), eps)
        assert report.stage == "F6/ii"
        w = report.certificate
        assert (w.instance, w.agent, w.target) == ("F6", 0, "F5")
        assert (w.truthful_value, w.deviating_value) == (F(1, 8) + eps / 4, quarter + eps / 4)

    def test_unproportional_f6(self):
        eps = F(1, 100)
        state = GadgetState.canonical(eps)
        inst = build_instances(state)
        halves = Allocation((state.X1, state.X2))
        crossed = Allocation((state.X11 | state.X21, state.X12 | state.X22))
        table = {inst[k]: halves for k in ("F1", "F2", "F5")}
        table.update({inst[k]: crossed for k in ("F3", "F4", "F6")})
        report = run_gadget(lookup(table), eps)
        assert report.verdict is Verdict.PROPORTIONALITY_VIOLATION
        assert report.stage == "F6/iii"
        assert evaluate(inst["F6"][1], crossed[1]) == quarter + eps / 4 < F(3, 8)

    def test_forced_state_diverged_with_large_eps(self):
        # at eps = 3/5 the F3 deviation no longer pays, so a mechanism that
        # skews F3 escapes every witness; the driver says so instead of guessing
        eps = F(3, 5)
        state = GadgetState.canonical(eps)
        f3 = build_instances(state)["F3"]
        skew = Allocation((Piece(((0, F(1, 20)), (half, F(17, 20)))), Piece(((F(1, 20), half), (F(17, 20), 1)))))
        mech = lookup({f3: skew})
        report = _Driver(mech, eps).run()
        assert report.verdict is Verdict.FORCED_STATE_DIVERGED
        assert report.stage == "F3"
        assert report.certificate is None
        assert report.notes

    def test_json(self):
        report = run_gadget(MechanismId.SIMPLE_EF)
        data = json.loads(json.dumps(report.to_json()))
        assert data["verdict"] == "TruthfulnessViolation"
        assert data["eps_used"] == "1/100"
        assert F(data["certificate"]["gain"]) > 0
        assert "F1" in data["instances"]


def _mech(mech_id):
    from cakecut.mechanisms import get_mechanism

    return get_mechanism(mech_id)

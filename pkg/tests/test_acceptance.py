"""Acceptance checks 1-9, one PASS/FAIL line each.

Run standalone with ``python3 tests/test_acceptance.py`` or through pytest,
which repeats the lines in its terminal summary.
"""

import random
import sys
from fractions import Fraction as F
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from conftest import oracle_value  # noqa: E402

from cakecut.allocation import Allocation, Piece, audit  # noqa: E402
from cakecut.gadget import Verdict as GadgetVerdict  # noqa: E402
from cakecut.gadget import final_inequality_check, run_gadget, verify_witness  # noqa: E402
from cakecut.mechanisms import (  # noqa: E402
    MechanismId,
    connected_prop,
    connected_prop_trace,
    cut_and_choose,
    even_paz,
    even_paz_trace,
    get_mechanism,
    moving_knife,
    rotating_ef,
    simple_ef,
)
from cakecut.strategy import (  # noqa: E402
    Scenario,
    brute_force_best_response,
    evenpaz_counterexample,
    movingknife_counterexample,
    outcome,
    replay,
    rotatingef_risk_profile,
    simpleef_counterexample,
)
from cakecut.valuation import PiecewiseConstant, cut, ell, evaluate, integrate, rr, step_density  # noqa: E402

RESULTS: dict[int, tuple[bool, str]] = {}


def record(number, ok, detail):
    RESULTS[number] = (ok, detail)
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(line)
    return ok


def random_profile(rng, n, grid=12, levels=(F(1, 2), F(1), F(3, 2), F(2), F(3))):
    profile = []
    for _ in range(n):
        k = rng.randint(0, 4)
        points = sorted(F(p, grid) for p in rng.sample(range(1, grid), k))
        profile.append(step_density(points, [rng.choice(levels) for _ in range(k + 1)]))
    return profile


def corpus(count=200, seed=2024):
    rng = random.Random(seed)
    return [random_profile(rng, rng.randint(2, 6)) for _ in range(count)]


CORPUS = corpus()


def check_1():
    bad = 0
    for profile in CORPUS:
        n = len(profile)
        for mech in (simple_ef, rotating_ef):
            A = mech(profile)
            r = audit(profile, A)
            exact = all(evaluate(f, A[j]) == f.total() / n for f in profile for j in range(n))
            if not (exact and r.exact and r.entire and r.envy_free):
                bad += 1
    return record(1, bad == 0, f"simple_ef/rotating_ef exact, entire, envy-free on {len(CORPUS)} profiles; failures={bad}")


def check_2():
    bad = 0
    for profile in CORPUS:
        n = len(profile)
        for mech in (moving_knife, even_paz, connected_prop):
            r = audit(profile, mech(profile))
            if not (r.proportional and r.entire and r.connected):
                bad += 1
        trace = connected_prop_trace(profile)
        open_ = connected_prop(profile, entire=False)
        for i in trace.order[:-1]:
            if evaluate(profile[i], open_[i]) != profile[i].total() / n:
                bad += 1
        if not audit(profile, open_).proportional:
            bad += 1
    return record(2, bad == 0, f"proportional, entire, connected; open variant pays exact shares; failures={bad}")


def check_3():
    s = movingknife_counterexample(3)
    o = outcome(s, s.opponent_profiles[0])
    truthful_piece = o.truthful_allocation[0]
    deviating_piece = o.deviating_allocation[0]
    n = 3
    ok = (
        (o.truthful, o.deviating) == (F(1, 3), F(7, 18))
        and truthful_piece == Piece.interval(F(1, 9), F(4, 9))
        and deviating_piece == Piece.interval(F(1, 9), F(1, 2))
        and truthful_piece == Piece.interval(F(1, n * n), F(1, n) + F(1, n * n))
        and deviating_piece == Piece.interval(F(1, n * n), F(1, n) + F(3, 2 * n * n))
    )
    return record(3, ok, f"truthful {o.truthful} on {truthful_piece}, deviating {o.deviating} on {deviating_piece}")


def check_4():
    eps = F(1, 20)
    s = evenpaz_counterexample(eps)
    opp = s.opponent_profiles[0]
    _, steps = even_paz_trace(list(s.profile(opp, s.true_f)))
    o = outcome(s, opp)
    gain = o.deviating - o.truthful
    cut_ok = steps[0].cut == F(97, 100)
    gain_ok = gain == F(3, 800) and replay_ok(s)
    stated_ok = (o.truthful, o.deviating) == (F(73, 100), F(59, 80))
    detail = (
        f"cut {steps[0].cut} ({'ok' if cut_ok else 'mismatch'}); gain {gain} ({'ok' if gain_ok else 'mismatch'}); "
        f"values {o.truthful} vs {o.deviating}, stated 73/100 vs 59/80 ({'ok' if stated_ok else 'mismatch'})"
    )
    return record(4, cut_ok and gain_ok and stated_ok, detail)


def replay_ok(s):
    from cakecut.strategy import classify_deviation

    cert = classify_deviation(s)
    return replay(cert) and cert.gain == F(3, 800)


def check_5():
    s = simpleef_counterexample(3)
    o = outcome(s, s.opponent_profiles[0])
    n = 3
    formula = (F(1, n * n) + F(n - 1, 2 * n * n), F(1, n))
    ok = (o.truthful, o.deviating) == (F(2, 9), F(1, 3)) == formula
    return record(5, ok, f"truthful {o.truthful} vs deviating {o.deviating}")


def check_6():
    eps = F(1, 100)
    true_f = step_density([F(1, 2)], [F(1, 2), F(3, 2)])
    report = PiecewiseConstant.uniform()
    opp = rotatingef_risk_profile(true_f, report, 2, eps)
    A = rotating_ef([report, *opp])
    value = evaluate(true_f, A[0])
    # replay through an independent integrator
    ok = value == oracle_value(true_f, A[0]) and value < true_f.total() / 2
    return record(6, ok, f"deviating true value {value} < {true_f.total() / 2}")


def check_7():
    bad = 0
    checked = 0
    for n in range(2, 7):
        step = F(1, 4 * n * n)
        grid = [k * step for k in range(4 * n * n + 1)]
        for f in (ell(n), rr(n)):
            for i, a in enumerate(grid):
                for b in grid[i + 1 :]:
                    checked += 1
                    if integrate(f, a, b) >= F(1, n) and b - a < F(1, n):
                        bad += 1
    return record(7, bad == 0, f"{checked} grid intervals for ell and rr, n=2..6; counterexamples={bad}")


def dictator(profile):
    return Allocation((Piece.whole(),) + tuple(Piece() for _ in profile[1:]))


def check_8():
    parts = []
    ok = True
    for mech_id in (
        MechanismId.MOVING_KNIFE,
        MechanismId.EVEN_PAZ,
        MechanismId.CONNECTED_PROP,
        MechanismId.ROTATING_EF,
        MechanismId.SIMPLE_EF,
    ):
        report = run_gadget(mech_id, F(1, 100))
        good = report.verdict is GadgetVerdict.TRUTHFULNESS_VIOLATION and verify_witness(
            get_mechanism(mech_id), report.certificate
        )
        ok &= good
        parts.append(f"{mech_id.value}@{report.stage}")
    report = run_gadget(dictator, F(1, 100))
    ok &= report.verdict is GadgetVerdict.PROPORTIONALITY_VIOLATION and report.stage == "F1"
    ok &= final_inequality_check(F(1, 100)) is True and final_inequality_check(F(1, 2)) is False
    return record(8, ok, "violations " + ", ".join(parts) + f"; dictator {report.verdict.value}@{report.stage}")


def check_9():
    rng = random.Random(99)
    bad = 0
    for _ in range(1000):
        f = random_profile(rng, 1, grid=rng.choice([6, 12, 24]), levels=(F(0), F(1, 2), F(1), F(2), F(5, 3)))[0]
        if f.total() == 0:
            f = PiecewiseConstant.uniform()
        x = F(rng.randint(0, 48), 48)
        r = integrate(f, x, 1) * F(rng.randint(0, 32), 32)
        y = cut(f, x, r)
        z = F(rng.randint(0, 48), 48)
        a, b, c = sorted((x, y, z))
        if integrate(f, x, y) != r or oracle_value(f, [(x, y)]) != r:
            bad += 1
        if evaluate(f, [(a, c)]) != evaluate(f, [(a, b)]) + evaluate(f, [(b, c)]):
            bad += 1
    chooser_bad = 0
    cases = 0
    rng = random.Random(7)
    for _ in range(20):
        cutter, chooser = random_profile(rng, 2)
        truthful = evaluate(chooser, cut_and_choose([cutter, chooser])[1])
        _, best = brute_force_best_response(MechanismId.CUT_AND_CHOOSE, 1, chooser, (cutter,))
        cases += 1
        if best != truthful:
            chooser_bad += 1
    ok = bad == 0 and chooser_bad == 0
    return record(9, ok, f"1000 cut/eval triples, failures={bad}; chooser optimal in {cases - chooser_bad}/{cases} cases")


CHECKS = [check_1, check_2, check_3, check_4, check_5, check_6, check_7, check_8, check_9]


@pytest.mark.parametrize("check", CHECKS, ids=[f"criterion_{i}" for i in range(1, 10)])
def test_criterion(check):
    assert check()


if __name__ == "__main__":
    results = [check() for check in CHECKS]
    sys.exit(0 if all(results) else 1)

"""
Profitable lies
===============

Certificates for misreports against four mechanisms, classified by whether a
cautious agent would still be tempted.
"""

from fractions import Fraction as F

from cakecut.strategy import (
    classify_deviation,
    evenpaz_counterexample,
    movingknife_counterexample,
    outcome,
    replay,
    rotatingef_counterexample,
    sample_profiles,
    simpleef_counterexample,
)

scenarios = {
    "moving knife, n=3": movingknife_counterexample(3),
    "Even-Paz, eps=1/20": evenpaz_counterexample(F(1, 20)),
    "simple EF, n=3": simpleef_counterexample(3),
    "rotating EF, n=2": rotatingef_counterexample(2),
}

# %%
# The first opponent profile in each family is the one that makes the lie pay.
for name, s in scenarios.items():
    o = outcome(s, s.opponent_profiles[0])
    print(f"{name:22s} truthful {o.truthful!s:8s} lying {o.deviating!s:8s}")

# %%
# Adding random opponents can expose risk.  A lie that sometimes drops below
# a proportional share deters a risk-averse agent.
for name, s in scenarios.items():
    wider = s.with_profiles(s.opponent_profiles + tuple(sample_profiles(s.n - 1, 20, seed=1)))
    cert = classify_deviation(wider)
    print(f"{name:22s} {cert.verdict.value:20s} gain {cert.gain}  replayed={replay(cert)}")

"""
Dividing a cake exactly
=======================

Build piecewise-constant valuations, run the two exact mechanisms and audit
what every agent thinks of every share.  All numbers are exact rationals.
"""

from fractions import Fraction as F

from cakecut import PiecewiseConstant, audit, rotating_ef, simple_ef
from cakecut.valuation import step_density

# %%
# Three agents: one prefers the left third, two are indifferent.
profile = [step_density([F(1, 3)], [1, F(1, 2)]), PiecewiseConstant.uniform(), PiecewiseConstant.uniform()]

# %%
# Every cell is cut into n equal-value slivers for every agent, so each share
# is worth exactly 1/n of the whole to everyone.
for mechanism in (simple_ef, rotating_ef):
    allocation = mechanism(profile)
    report = audit(profile, allocation)
    print(mechanism.__name__)
    for i, share in enumerate(allocation):
        print(f"  agent {i}: {share}")
    print("  exact:", report.exact, " envy-free:", report.envy_free, " entire:", report.entire)
    print("  values:", [[str(v) for v in row] for row in report.per_agent_values])

"""
Searching for a better report
=============================

Brute force over a small grid of step densities.  The chooser in cut and
choose never beats the truth; the first agent under moving knife can.
"""

from fractions import Fraction as F

from cakecut import PiecewiseConstant, brute_force_best_response, evaluate, moving_knife
from cakecut.strategy import movingknife_counterexample
from cakecut.valuation import step_density

U = PiecewiseConstant.uniform()
cutter = step_density([F(1, 3)], [2, F(1, 2)])
report, value = brute_force_best_response("cut_and_choose", 1, U, (cutter,))
print("chooser best report", report.to_json(), "value", value)

# %%
s = movingknife_counterexample(3)
opponents = s.opponent_profiles[0]
truthful = evaluate(U, moving_knife([U, *opponents])[0])
report, value = brute_force_best_response("moving_knife", 0, U, opponents, grid=[F(1, 6), F(1, 3)])
print("moving knife: truthful", truthful, "best found", value)

"""
Connected pieces
================

Moving knife, Even-Paz and the mark-based connected mechanism each hand every
agent a single interval worth at least 1/n of her total.
"""

from fractions import Fraction as F

from cakecut import audit, connected_prop, even_paz, moving_knife
from cakecut.mechanisms import connected_prop_trace, even_paz_trace
from cakecut.valuation import step_density

profile = [
    step_density([F(1, 2)], [F(3, 2), F(1, 2)]),
    step_density([F(1, 4), F(3, 4)], [F(1, 2), 2, F(1, 2)]),
    step_density([F(2, 3)], [F(1, 2), 2]),
]

# %%
for mechanism in (moving_knife, even_paz, connected_prop):
    allocation = mechanism(profile)
    report = audit(profile, allocation)
    shares = ", ".join(str(s) for s in allocation)
    print(f"{mechanism.__name__:15s} {shares}   proportional={report.proportional}")

# %%
# Traces expose the intermediate marks and cuts.
_, steps = even_paz_trace(profile)
for step in steps:
    print("Even-Paz cut", step.cut, "left group", step.left_group)
print("marks", connected_prop_trace(profile).marks)

# %%
# Without the final stretch, every agent served before the last gets exactly
# her share and some cake is left over.
open_ = connected_prop(profile, entire=False)
print("open variant:", [str(s) for s in open_], "entire:", audit(profile, open_).entire)

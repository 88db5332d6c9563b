"""
No proportional mechanism is truthful
=====================================

The six-instance driver adapts each query to the previous answers and ends
with a reproducible witness against any deterministic two-agent mechanism.
"""

from fractions import Fraction as F

from cakecut import MechanismId, run_gadget
from cakecut.allocation import Allocation, Piece
from cakecut.gadget import final_inequality_check

print("final inequality at 1/100:", final_inequality_check(F(1, 100)))
print("final inequality at 1/2:  ", final_inequality_check(F(1, 2)))

# %%
for mech in MechanismId:
    report = run_gadget(mech)
    w = report.certificate
    print(f"{mech.value:20s} {report.verdict.value} at {report.stage}: agent {w.agent} of {w.instance} "
          f"reports as in {w.target}, gains {w.gain}")


# %%
# A mechanism that gives everything to agent 0 is caught on the first instance.
def dictator(profile):
    return Allocation((Piece.whole(),) + tuple(Piece() for _ in profile[1:]))


report = run_gadget(dictator)
print(report.verdict.value, "at", report.stage)

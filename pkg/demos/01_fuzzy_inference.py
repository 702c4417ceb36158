"""
Mamdani inference with mean-of-maximum
======================================

Build a three-input system by hand, fire it, and look at the output set
that the defuzzifier reads.
"""

import numpy as np

from gridfuzz import Fis, FuzzyRule, MembershipFunction, baseline_controller

TRI = MembershipFunction.triangular

# one rule: "balance is mid AND soc is mid AND price is high -> sell a lot"
inputs = ((TRI(0.2, 0.5, 0.8),), (TRI(0.2, 0.5, 0.8),), (TRI(0.5, 1.0, 1.0),))
fis = Fis(inputs, (TRI(0.4, 0.6, 0.8),), (FuzzyRule((0, 0, 0), 0, 1.0),))

# at the antecedent peaks the rule fires fully and MoM returns the consequent peak
print(fis.infer((0.5, 0.5, 1.0)))

# away from the peaks the output set is clipped; the plateau midpoint stays at 0.6
x = (0.4, 0.55, 0.9)
print(fis.consequent_strengths(x), fis.infer(x))

# the aggregate on the 1001-point grid, and the sampled MoM read off it
grid, agg = fis.aggregate(x)
print(agg.max(), grid[agg == agg.max()][[0, -1]], fis.infer_sampled(x))

# the 5x5x5 baseline used to seed the hierarchical GA
ctrl = baseline_controller("hga")
print(ctrl.rule_counts())
for bal in np.linspace(0, 1, 5):
    print(f"balance {bal:.2f} -> alpha {ctrl.alpha.infer((bal, 0.5, 0.5)):.3f}")

"""
Classic and hierarchical chromosomes
====================================

The classic encoding tunes 3 triangles per variable and 27 rule weights.
The hierarchical one adds a control bit per input term: switching a term
off removes every rule that uses it.
"""

import numpy as np

from gridfuzz import (CLASSIC, HIERARCHICAL, Chromosome, decode, default_bounds, encode,
                      random_chromosome, seed_chromosome)

for enc in (CLASSIC, HIERARCHICAL):
    print(enc.name, enc.length, "genes:", enc.control_per_fis, "control +", enc.params_per_fis, "params per system")

c = seed_chromosome(HIERARCHICAL)
bits = c.control.copy()
bits[:15] = [1, 1, 1, 0, 0, 0, 0, 1, 0, 1, 0, 0, 1, 0, 1]
ctrl = decode(HIERARCHICAL, Chromosome(bits, c.params))
print("active terms", ctrl.alpha.active_mf_counts(), "-> rules", ctrl.rule_counts())

# every gene has a box; the middle triangle's peak may move a quarter-step either way
b = default_bounds(HIERARCHICAL)
print("peak bounds", b.lower[6], b.upper[6])

# decode/encode are inverse once each MF's parameters are sorted
r = random_chromosome(HIERARCHICAL, seed=1)
again = encode(HIERARCHICAL, decode(HIERARCHICAL, r))
print("round trip", decode(HIERARCHICAL, again) == decode(HIERARCHICAL, r))
print(r.to_line()[:60], "...")

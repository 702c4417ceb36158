"""
One day of the microgrid
========================

Run a day of synthetic data through fixed-share controllers and compare
against selling every surplus and buying every deficit.
"""

import numpy as np

from gridfuzz import CONFIG2, Route, constant_controller, no_storage_profit, simulate, synth_scenario

day = synth_scenario(1, seed=3)
print(len(day), "samples,", day.dt, "h each")
print("production peak", day.production.max().round(2), "kW, demand peak", day.demand.max().round(2), "kW")

# grid only: the battery is never touched
print("no storage:", round(no_storage_profit(day), 4), "MU")

# keep a share of every surplus in the battery, cover the same share of every deficit from it;
# part of the gain below is just the initial charge being spent
for share in (1.0, 0.5, 0.0):
    res = simulate(day, CONFIG2, constant_controller(share, share))
    print(f"alpha = beta = {share}: profit {res.total_profit:8.4f} MU, final soc {res.ledger.soc[-1]:.3f}")

# which routes did the last run take?
led = simulate(day, CONFIG2, constant_controller(0.0, 0.0)).ledger
names, counts = np.unique(led.routes, return_counts=True)
print({Route(n).name: int(c) for n, c in zip(names, counts)})

# hourly state of charge
print(np.round(led.soc[::4], 3))

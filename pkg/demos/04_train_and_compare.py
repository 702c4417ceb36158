"""
Tuning both encodings on the same data
======================================

A short version of the full comparison: train on the odd samples,
test on the even ones. Pass a file name to save a profit plot
(needs matplotlib).
"""

import sys

import numpy as np

from gridfuzz import CONFIG2, EvolutionConfig, no_storage_profit, split_train_test, synth_scenario
from gridfuzz.pipeline import cumulative_series, evaluate, train

scenario = synth_scenario(30, seed=0)
train_set, test_set = split_train_test(scenario)
cfg = EvolutionConfig(population_size=20, generations=25, master_seed=0)

print("no storage on the test half:", round(no_storage_profit(test_set), 3))
ledgers = {}
for scheme in ("classic", "hga"):
    res = train(train_set, CONFIG2, scheme, cfg,
                on_generation=lambda g, h: g % 5 == 4 and print(f"  {scheme} gen {g + 1}: {h.best_value:.3f}"))
    summary, ledgers[scheme] = evaluate(res.controller, test_set, CONFIG2, res.ranges)
    print(f"{scheme}: test profit {summary['profit']:.3f}, rules {summary['rules_alpha']}/{summary['rules_beta']}")

if len(sys.argv) > 1:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(8, 3))
    days = np.arange(len(test_set)) * test_set.dt / 24
    for scheme, led in ledgers.items():
        ax.plot(days, cumulative_series(led)["profit"], label=scheme)
    ax.set_xlabel("days (test half)")
    ax.set_ylabel("cumulative profit (MU)")
    ax.legend()
    fig.tight_layout()
    fig.savefig(sys.argv[1])
    print("saved", sys.argv[1])

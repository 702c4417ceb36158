"""Train / evaluate / compare workflows shared by the CLI and the demos."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .codec import Chromosome, decode, get_encoding
from .data import NormalizationRanges, Scenario, ScenarioError, extract_ranges, split_train_test
from .evolution import EvolutionConfig, RunHistory, evolve
from .fis import FuzzyController
from .microgrid import BatteryModel, Ledger, simulate

# test-set profits of the original year-long study, quoted in the comparison footer
REFERENCE_PROFIT_CLASSIC = 2560.446
REFERENCE_PROFIT_HGA = 4277.713


class ProfitFitness:
    """Total training profit of the decoded controller."""

    def __init__(self, scenario: Scenario, batt: BatteryModel, ranges: NormalizationRanges,
                 scheme):
        self.scenario = scenario
        self.batt = batt
        self.ranges = ranges
        self.encoding = get_encoding(scheme)

    def __call__(self, c: Chromosome) -> float:
        ctrl = decode(self.encoding, c)
        return simulate(self.scenario, self.batt, ctrl, self.ranges, record=False).total_profit


@dataclass
class TrainResult:
    controller: FuzzyController
    history: RunHistory
    ranges: NormalizationRanges
    train_profit: float

    def rule_counter(self):
        enc = get_encoding(self.controller.meta["scheme"])
        return lambda c: decode(enc, c).rule_counts()


def train(train_set: Scenario, batt: BatteryModel, scheme, config: EvolutionConfig,
          on_generation=None) -> TrainResult:
    enc = get_encoding(scheme)
    ranges = extract_ranges(train_set)
    hist = evolve(config, enc, ProfitFitness(train_set, batt, ranges, enc),
                  on_generation=on_generation)
    ctrl = decode(enc, hist.best)
    ctrl = FuzzyController(ctrl.alpha, ctrl.beta, {
        "scheme": enc.name,
        "ranges": ranges.to_dict(),
        "chromosome": hist.best.to_line(),
        "train_profit": hist.best_value,
        "master_seed": config.master_seed,
    })
    return TrainResult(ctrl, hist, ranges, hist.best_value)


def controller_ranges(ctrl: FuzzyController, fallback: Scenario | None = None) -> NormalizationRanges:
    if "ranges" in ctrl.meta:
        return NormalizationRanges.from_dict(ctrl.meta["ranges"])
    if fallback is None:
        raise ValueError("controller carries no normalization ranges")
    return extract_ranges(fallback)


def evaluate(ctrl: FuzzyController, test_set: Scenario, batt: BatteryModel,
             ranges: NormalizationRanges | None = None) -> tuple[dict, Ledger]:
    """Simulate on the test set; returns a Table-style summary and the ledger."""
    if len(test_set) == 0:
        raise ScenarioError("test scenario is empty")
    ranges = ranges or controller_ranges(ctrl, test_set)
    res = simulate(test_set, batt, ctrl, ranges)
    tot = res.ledger.totals()
    ra, rb = ctrl.rule_counts()
    summary = {
        "scheme": ctrl.meta.get("scheme", "?"),
        "expense": tot["expense"],
        "revenue": tot["revenue"],
        "profit": tot["revenue"] - tot["expense"],
        "rules_alpha": ra,
        "rules_beta": rb,
        "steps": len(test_set),
    }
    return summary, res.ledger


def compare(scenario: Scenario, batt: BatteryModel, config: EvolutionConfig) -> dict:
    """Train both encodings with the same seed on the odd samples, test on the even ones."""
    train_set, test_set = split_train_test(scenario)
    rows = {}
    results = {}
    for scheme in ("classic", "hga"):
        res = train(train_set, batt, scheme, config)
        summary, _ = evaluate(res.controller, test_set, batt, res.ranges)
        summary["train_profit"] = res.train_profit
        rows[scheme] = summary
        results[scheme] = res
    c, h = rows["classic"]["profit"], rows["hga"]["profit"]
    ratio = h / c if c != 0 else float("nan")
    return {"classic": rows["classic"], "hga": rows["hga"], "profit_ratio": ratio,
            "reference_ratio": REFERENCE_PROFIT_HGA / REFERENCE_PROFIT_CLASSIC, "_results": results}


def format_comparison(report: dict) -> str:
    c, h = report["classic"], report["hga"]
    lines = [f"{'':16s}{'fuzzy-GA':>16s}{'fuzzy-HGA':>16s}"]
    for key, label in (("expense", "Expense (MU)"), ("revenue", "Revenue (MU)"),
                       ("profit", "Profit (MU)")):
        lines.append(f"{label:16s}{c[key]:16.3f}{h[key]:16.3f}")
    lines.append(f"{'# rules (alpha)':16s}{c['rules_alpha']:16d}{h['rules_alpha']:16d}")
    lines.append(f"{'# rules (beta)':16s}{c['rules_beta']:16d}{h['rules_beta']:16d}")
    lines.append(f"profit ratio (HGA / GA): {report['profit_ratio']:.4f}")
    lines.append(f"reference ratio reported for the original year-long dataset: "
                 f"{REFERENCE_PROFIT_HGA:.3f} / {REFERENCE_PROFIT_CLASSIC:.3f} = {report['reference_ratio']:.4f}")
    return "\n".join(lines)


def daily_report(ledger: Ledger, steps_per_day: int = 96) -> list[dict]:
    """Per-day sums of flows and cash."""
    n = len(ledger)
    days = []
    for d, start in enumerate(range(0, n, steps_per_day)):
        sl = slice(start, min(start + steps_per_day, n))
        days.append({
            "day": d,
            "steps": sl.stop - sl.start,
            "e_sold": float(ledger.e_sold[sl].sum()),
            "e_bought": float(ledger.e_bought[sl].sum()),
            "e_charged": float(ledger.e_charged[sl].sum()),
            "e_discharged": float(ledger.e_discharged[sl].sum()),
            "revenue": float(ledger.revenue[sl].sum()),
            "expense": float(ledger.expense[sl].sum()),
            "profit": float(ledger.profit[sl].sum()),
            "soc_end": float(ledger.soc[sl.stop - 1]),
        })
    return days


def write_rows(path, rows: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        if not rows:
            return
        w = csv.writer(fh, lineterminator="\n")
        keys = list(rows[0])
        w.writerow(keys)
        for r in rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in (r[k] for k in keys)])


def cumulative_series(ledger: Ledger) -> dict[str, np.ndarray]:
    return {"revenue": np.cumsum(ledger.revenue), "expense": np.cumsum(ledger.expense),
            "profit": np.cumsum(ledger.profit)}

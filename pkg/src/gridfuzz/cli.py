"""Command-line entry point: ``gridfuzz {synth,train,evaluate,compare,report}``.

A run is described by an optional JSON config file; flags given on the
command line override it::

    {
      "scenario": {"synth": {"days": 30, "seed": 0}},   # or {"file": "data.csv"}
      "battery": "config2",                             # or a dict of BatteryModel fields
      "scheme": "hga",
      "seed": 0,
      "evolution": {"population_size": 40, "generations": 100, "mutation_rate": 0.01},
      "out": "runs/demo"
    }
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .codec import CodecError, get_encoding
from .data import ScenarioError, load_scenario, save_scenario, split_train_test, synth_scenario
from .evolution import EvolutionConfig, EvolutionError
from .fis import FuzzyController, InvalidMembershipError
from .microgrid import BatteryModel, Ledger, battery_preset
from .pipeline import (compare, cumulative_series, daily_report, evaluate, format_comparison,
                       train, write_rows)


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    scenario_file: str | None = None
    synth_days: int = 30
    synth_seed: int = 0
    battery: str | dict = "config2"
    scheme: str = "hga"
    seed: int = 0
    evolution: dict = field(default_factory=dict)
    out: str = "gridfuzz-out"

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        try:
            with open(path) as fh:
                d = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        cfg = cls()
        sc = d.get("scenario", {})
        if "file" in sc:
            cfg.scenario_file = str(Path(path).parent / sc["file"]) if not os.path.isabs(sc["file"]) else sc["file"]
        if "synth" in sc:
            cfg.synth_days = int(sc["synth"].get("days", cfg.synth_days))
            cfg.synth_seed = int(sc["synth"].get("seed", cfg.synth_seed))
        for key in ("battery", "scheme", "seed", "evolution", "out"):
            if key in d:
                setattr(cfg, key, d[key])
        return cfg

    def battery_model(self) -> BatteryModel:
        try:
            if isinstance(self.battery, dict):
                spec = dict(self.battery)
                base = spec.pop("preset", "config2")
                return battery_preset(base, **spec)
            return battery_preset(self.battery)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"battery: {exc}") from None

    def evolution_config(self) -> EvolutionConfig:
        known = {f.name for f in fields(EvolutionConfig)}
        extra = set(self.evolution) - known
        if extra:
            raise ConfigError(f"unknown evolution field(s): {', '.join(sorted(extra))}")
        try:
            cfg = EvolutionConfig(**{**self.evolution, "master_seed": int(self.seed)})
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"evolution: {exc}") from None
        if cfg.threads is None:
            env = os.environ.get("GRIDFUZZ_THREADS")
            cfg = replace(cfg, threads=max(1, int(env)) if env else 1)
        return cfg

    def load_scenario(self):
        if self.scenario_file:
            return load_scenario(self.scenario_file)
        return synth_scenario(self.synth_days, self.synth_seed)


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--seed", type=int, help="master seed of the GA")
    p.add_argument("--scheme", choices=("classic", "hga"))
    p.add_argument("--battery", choices=("config1", "config2"))
    p.add_argument("--out", help="output directory")
    p.add_argument("--scenario", help="scenario CSV (overrides synthetic data)")
    p.add_argument("--days", type=int, help="days of synthetic data")
    p.add_argument("--data-seed", type=int, help="seed of the synthetic data")
    p.add_argument("--generations", type=int)
    p.add_argument("--population", type=int)
    p.add_argument("--mutation-rate", type=float)
    p.add_argument("--crossover-fraction", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gridfuzz", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write a synthetic scenario CSV")
    p.add_argument("--days", type=int, default=30)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="CSV path")

    p = sub.add_parser("train", help="evolve a controller on the training split")
    _common(p)

    p = sub.add_parser("evaluate", help="simulate a saved controller on the test split")
    _common(p)
    p.add_argument("--controller", required=True, help="controller JSON from `train`")

    p = sub.add_parser("compare", help="train and test both encodings with one seed")
    _common(p)

    p = sub.add_parser("report", help="turn a ledger CSV into per-day and time-series files")
    p.add_argument("--ledger", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--steps-per-day", type=int, default=96)
    return parser


def resolve_config(args) -> RunConfig:
    cfg = RunConfig.from_file(args.config) if args.config else RunConfig()
    if args.seed is not None:
        cfg.seed = args.seed
    if args.scheme:
        cfg.scheme = args.scheme
    if args.battery:
        cfg.battery = args.battery
    if args.out:
        cfg.out = args.out
    if args.scenario:
        cfg.scenario_file = args.scenario
    if args.days is not None:
        cfg.synth_days = args.days
        if not args.scenario:
            cfg.scenario_file = None
    if args.data_seed is not None:
        cfg.synth_seed = args.data_seed
    evo = dict(cfg.evolution)
    for flag, key in (("generations", "generations"), ("population", "population_size"),
                      ("mutation_rate", "mutation_rate"),
                      ("crossover_fraction", "crossover_fraction")):
        if getattr(args, flag) is not None:
            evo[key] = getattr(args, flag)
    cfg.evolution = evo
    return cfg


def cmd_synth(args) -> int:
    s = synth_scenario(args.days, args.seed)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    save_scenario(s, args.out)
    print(f"wrote {len(s)} samples to {args.out}")
    return 0


def cmd_train(args) -> int:
    cfg = resolve_config(args)
    batt = cfg.battery_model()
    evo = cfg.evolution_config()
    enc = get_encoding(cfg.scheme)
    train_set, _ = split_train_test(cfg.load_scenario())
    res = train(train_set, batt, enc, evo)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    res.controller.save(out / "controller.json")
    res.history.to_csv(out / "history.csv", res.rule_counter())
    (out / "best_chromosome.txt").write_text(res.history.best.to_line() + "\n")
    ra, rb = res.controller.rule_counts()
    print(f"scheme={enc.name} train_profit={res.train_profit:.6f} rules_alpha={ra} rules_beta={rb}")
    return 0


def cmd_evaluate(args) -> int:
    cfg = resolve_config(args)
    batt = cfg.battery_model()
    try:
        ctrl = FuzzyController.load(args.controller)
    except (KeyError, TypeError, ValueError, InvalidMembershipError) as exc:
        raise CodecError(f"cannot decode controller {args.controller}: {exc}") from None
    _, test_set = split_train_test(cfg.load_scenario())
    summary, ledger = evaluate(ctrl, test_set, batt)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    ledger.to_csv(out / "ledger.csv")
    (out / "summary.json").write_text(json.dumps(summary, indent=1) + "\n")
    print(" ".join(f"{k}={v:.6f}" if isinstance(v, float) else f"{k}={v}"
                   for k, v in summary.items()))
    return 0


def cmd_compare(args) -> int:
    cfg = resolve_config(args)
    batt = cfg.battery_model()
    rep = compare(cfg.load_scenario(), batt, cfg.evolution_config())
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    results = rep.pop("_results")
    for scheme, res in results.items():
        res.controller.save(out / f"controller_{scheme}.json")
        res.history.to_csv(out / f"history_{scheme}.csv", res.rule_counter())
    text = format_comparison(rep)
    (out / "comparison.txt").write_text(text + "\n")
    (out / "comparison.json").write_text(json.dumps(rep, indent=1) + "\n")
    print(text)
    return 0


def cmd_report(args) -> int:
    ledger = Ledger.from_csv(args.ledger)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_rows(out / "daily.csv", daily_report(ledger, args.steps_per_day))
    cum = cumulative_series(ledger)
    rows = [{"t": t, "soc": float(ledger.soc[t]), "balance": float(ledger.balance[t]),
             "e_sold": float(ledger.e_sold[t]), "e_bought": float(ledger.e_bought[t]),
             "e_charged": float(ledger.e_charged[t]),
             "e_discharged": float(ledger.e_discharged[t]),
             "revenue": float(ledger.revenue[t]), "expense": float(ledger.expense[t]),
             "profit": float(ledger.profit[t]),
             "cum_revenue": float(cum["revenue"][t]), "cum_expense": float(cum["expense"][t]),
             "cum_profit": float(cum["profit"][t])} for t in range(len(ledger))]
    write_rows(out / "timeseries.csv", rows)
    print(f"wrote {out / 'daily.csv'} and {out / 'timeseries.csv'}")
    return 0


COMMANDS = {"synth": cmd_synth, "train": cmd_train, "evaluate": cmd_evaluate,
            "compare": cmd_compare, "report": cmd_report}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, ScenarioError, CodecError, EvolutionError, OSError, ValueError) as exc:
        print(f"gridfuzz {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

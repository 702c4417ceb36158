"""Fuzzy energy management for a battery-equipped microgrid, tuned by GA or hierarchical GA."""

from .codec import (CLASSIC, HIERARCHICAL, Chromosome, CodecError, Encoding, GeneBounds,
                    assign_consequents, baseline_controller, decode, decode_classic,
                    decode_hierarchical, default_bounds, encode, get_encoding,
                    random_chromosome, seed_chromosome)
from .data import (NormalizationRanges, Scenario, ScenarioError, SynthParams, extract_ranges,
                   load_scenario, save_scenario, split_train_test, synth_scenario)
from .evolution import (EvolutionConfig, EvolutionError, OperatorError, RunHistory,
                        binary_point_mutation, convex_crossover_real, evolve,
                        non_uniform_mutation, one_point_crossover_binary,
                        stochastic_uniform_selection)
from .fis import (Fis, FuzzyController, FuzzyRule, InvalidMembershipError, MembershipFunction,
                  MFKind, NoRuleFired, active_rule_count, defuzzify_mom, eval_membership, infer)
from .microgrid import (CONFIG1, CONFIG2, BatteryModel, Ledger, MgState, Route, SimResult,
                        StepLedger, balance, battery_charge, battery_discharge, battery_preset,
                        circuit_efficiency, classify, constant_controller, no_storage_profit,
                        normalize_inputs, simulate, step)

__version__ = "0.1.0"

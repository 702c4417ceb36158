"""Generational GA with mixed binary/real operators.

Binary control genes use one-cut-point crossover and per-gene flips; real
parametric genes use convex crossover and non-uniform mutation whose step
shrinks as the run ages. Every random draw comes from a generator seeded by
``(master_seed, generation, slot)``, so results do not depend on how fitness
evaluations are scheduled across threads.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .codec import Chromosome, Encoding, GeneBounds, default_bounds, get_encoding, random_chromosome


class OperatorError(ValueError):
    pass


class EvolutionError(RuntimeError):
    pass


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def stochastic_uniform_selection(fitnesses, n_picks: int, seed=None) -> np.ndarray:
    """Stochastic universal sampling.

    Fitness values are laid end to end on a line (shifted up by the minimum
    if any is negative) and read off at one random phase plus ``n_picks``
    equal strides.
    """
    f = np.asarray(fitnesses, dtype=np.float64)
    if f.size == 0 or not np.all(np.isfinite(f)):
        raise OperatorError("fitnesses must be finite and non-empty")
    if n_picks < 1:
        raise OperatorError("n_picks must be >= 1")
    rng = _rng(seed)
    if f.min() < 0:
        f = f - f.min()
    total = f.sum()
    if not total > 0:
        return rng.integers(0, f.size, size=n_picks)
    stride = total / n_picks
    marks = rng.uniform(0.0, stride) + stride * np.arange(n_picks)
    edges = np.cumsum(f)
    picks = np.searchsorted(edges, marks, side="right")
    return np.minimum(picks, f.size - 1)


def one_point_crossover_binary(p1, p2, seed=None, cut: int | None = None):
    """Swap the tails after a cut drawn uniformly from the interior positions."""
    a = np.asarray(p1)
    b = np.asarray(p2)
    if a.shape != b.shape:
        raise OperatorError(f"parent lengths differ: {a.size} vs {b.size}")
    n = a.size
    if n < 2:
        return a.copy(), b.copy()
    if cut is None:
        cut = int(_rng(seed).integers(1, n))
    return (np.concatenate([a[:cut], b[cut:]]), np.concatenate([b[:cut], a[cut:]]))


def convex_crossover_real(p1, p2, seed=None, lam: float | None = None):
    """``lam * p1 + (1 - lam) * p2`` and its mirror, with ``lam ~ U[0, 1]``."""
    a = np.asarray(p1, dtype=np.float64)
    b = np.asarray(p2, dtype=np.float64)
    if a.shape != b.shape:
        raise OperatorError(f"parent lengths differ: {a.size} vs {b.size}")
    if lam is None:
        lam = _rng(seed).random()
    c1 = lam * a + (1.0 - lam) * b
    c2 = lam * b + (1.0 - lam) * a
    # a convex combination can round one ulp past the parents' hull
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    return np.clip(c1, lo, hi), np.clip(c2, lo, hi)


def non_uniform_mutation(gene: float, lower: float, upper: float, g: int, G: int,
                         a: float = 1.0, seed=None, b: float | None = None,
                         upward: bool | None = None) -> float:
    """Move ``gene`` towards one of its bounds by ``b * (1 - g/G)**a`` of the gap."""
    if not lower <= gene <= upper:
        raise OperatorError(f"gene {gene} outside [{lower}, {upper}]")
    if not 0 <= g <= G:
        raise OperatorError(f"generation {g} outside [0, {G}]")
    rng = _rng(seed)
    if upward is None:
        upward = bool(rng.random() < 0.5)
    if b is None:
        b = rng.random()
    shrink = b * (1.0 - g / G) ** a
    if upward:
        return min(gene + (upper - gene) * shrink, upper)
    return max(gene - (gene - lower) * shrink, lower)


def binary_point_mutation(vec, rho: float, seed=None) -> np.ndarray:
    v = np.asarray(vec, dtype=np.uint8)
    flips = _rng(seed).random(v.size) < rho
    return np.where(flips, 1 - v, v).astype(np.uint8)


def mixed_crossover(p1: Chromosome, p2: Chromosome, rng: np.random.Generator):
    b1, b2 = one_point_crossover_binary(p1.control, p2.control, rng)
    r1, r2 = convex_crossover_real(p1.params, p2.params, rng)
    return Chromosome(b1, r1), Chromosome(b2, r2)


def mixed_mutation(c: Chromosome, bounds: GeneBounds, g: int, G: int, a: float, rho: float,
                   rng: np.random.Generator) -> Chromosome:
    """Per-gene flips on the control part, per-gene non-uniform moves on the rest."""
    bits = binary_point_mutation(c.control, rho, rng)
    x = c.params.copy()
    n = x.size
    hit = rng.random(n) < rho
    up = rng.random(n) < 0.5
    b = rng.random(n)
    shrink = b * (1.0 - g / G) ** a
    lo, hi = bounds.lower, bounds.upper
    moved = np.where(up, x + (hi - x) * shrink, x - (x - lo) * shrink)
    x = np.where(hit, np.clip(moved, lo, hi), x)
    return Chromosome(bits, x)


@dataclass(frozen=True)
class EvolutionConfig:
    population_size: int = 40
    generations: int = 100
    crossover_fraction: float = 0.8
    mutation_rate: float = 0.01
    decay_exponent: float = 1.0
    elite_count: int = 2
    master_seed: int = 0
    threads: int | None = None

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population_size must be >= 2")
        if self.generations < 1:
            raise ValueError("generations must be >= 1")
        if not 0.0 <= self.crossover_fraction <= 1.0:
            raise ValueError("crossover_fraction must lie in [0, 1]")
        if not 0.0 <= self.mutation_rate <= 1.0:
            raise ValueError("mutation_rate must lie in [0, 1]")
        if not 0 <= self.elite_count < self.population_size:
            raise ValueError("elite_count must lie in [0, population_size)")


@dataclass
class RunHistory:
    best_fitness: list[float] = field(default_factory=list)
    mean_fitness: list[float] = field(default_factory=list)
    best_chromosomes: list[Chromosome] = field(default_factory=list)

    @property
    def best(self) -> Chromosome:
        return self.best_chromosomes[-1]

    @property
    def best_value(self) -> float:
        return self.best_fitness[-1]

    def __len__(self):
        return len(self.best_fitness)

    def to_csv(self, path, rule_counter: Callable[[Chromosome], tuple[int, int]] | None = None):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("generation", "best", "mean", "active_rules_alpha", "active_rules_beta"))
            for g, (best, mean, chrom) in enumerate(zip(self.best_fitness, self.mean_fitness,
                                                         self.best_chromosomes)):
                ra, rb = rule_counter(chrom) if rule_counter else ("", "")
                w.writerow((g, repr(best), repr(mean), ra, rb))


def default_threads() -> int:
    env = os.environ.get("GRIDFUZZ_THREADS")
    if env:
        return max(1, int(env))
    return 1


def _evaluate(fitness, pop, threads):
    if threads > 1 and len(pop) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            return np.array(list(ex.map(fitness, pop)), dtype=np.float64)
    return np.array([fitness(c) for c in pop], dtype=np.float64)


def evolve(config: EvolutionConfig, scheme, fitness: Callable[[Chromosome], float],
           bounds: GeneBounds | None = None, on_generation=None) -> RunHistory:
    """Maximize ``fitness`` over chromosomes of ``scheme``.

    Each generation keeps ``elite_count`` best individuals, fills
    ``crossover_fraction`` of the remaining slots with crossover children and
    the rest with mutated copies of selected parents. ``on_generation(g,
    history)`` is called after each generation is scored.
    """
    enc: Encoding = get_encoding(scheme)
    bounds = bounds or default_bounds(enc)
    if bounds.lower.size != enc.n_params:
        raise ValueError("bounds do not match the encoding")
    n = config.population_size
    G = config.generations
    seed = int(config.master_seed)
    threads = config.threads or default_threads()
    pop = [random_chromosome(enc, bounds, np.random.default_rng([seed, 0, slot, 0]))
           for slot in range(n)]
    known: dict[int, float] = {}
    hist = RunHistory()
    for g in range(G):
        todo = [i for i in range(n) if i not in known]
        vals = _evaluate(fitness, [pop[i] for i in todo], threads)
        fit = np.empty(n)
        for i, v in known.items():
            fit[i] = v
        fit[todo] = vals
        bad = np.flatnonzero(~np.isfinite(fit))
        if bad.size:
            i = int(bad[0])
            raise EvolutionError(
                f"generation {g}, slot {i}: fitness {fit[i]} is not finite for chromosome "
                f"{pop[i].to_line()}")
        top = int(np.argmax(fit))
        hist.best_fitness.append(float(fit[top]))
        hist.mean_fitness.append(float(fit.mean()))
        hist.best_chromosomes.append(pop[top])
        if on_generation is not None:
            on_generation(g, hist)
        if g == G - 1:
            break
        pop, known = _next_generation(config, enc, bounds, pop, fit, g, seed)
    return hist


def _next_generation(config, enc, bounds, pop, fit, g, seed):
    n = len(pop)
    order = np.argsort(-fit, kind="stable")
    n_elite = config.elite_count
    n_kids = n - n_elite
    n_cross = int(round(config.crossover_fraction * n_kids))
    n_mut = n_kids - n_cross
    n_pairs = math.ceil(n_cross / 2)
    sel_rng = np.random.default_rng([seed, g + 1, n, 1])
    parents = stochastic_uniform_selection(fit - fit.min(), 2 * n_pairs + n_mut, sel_rng)
    parents = sel_rng.permutation(parents)

    new = [pop[i] for i in order[:n_elite]]
    known = {k: float(fit[i]) for k, i in enumerate(order[:n_elite])}
    for j in range(n_pairs):
        rng = np.random.default_rng([seed, g + 1, len(new), 2])
        c1, c2 = mixed_crossover(pop[parents[2 * j]], pop[parents[2 * j + 1]], rng)
        new.append(c1)
        if len(new) < n_elite + n_cross:
            new.append(c2)
    for j in range(n_mut):
        rng = np.random.default_rng([seed, g + 1, len(new), 3])
        parent = pop[parents[2 * n_pairs + j]]
        new.append(mixed_mutation(parent, bounds, g, config.generations,
                                  config.decay_exponent, config.mutation_rate, rng))
    return new, known

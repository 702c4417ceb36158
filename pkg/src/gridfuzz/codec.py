"""Chromosome <-> controller mapping for the classic and hierarchical encodings.

Classic (63 genes per system, 126 total)::

    [ 4 variables x 3 triangles x 3 params = 36 | 27 rule weights ]

Hierarchical (192 genes per system, 384 total)::

    control   : 15 bits per system, 5 input terms x 3 inputs
    parametric: [ 4 variables x (2 shoulders x 2 + 3 triangles x 3) = 52 | 125 rule weights ]

The full chromosome is ``[control_alpha control_beta | params_alpha params_beta]``.
Variables are ordered (balance, soc, price, output). Rules form the full
grid in C order over the three input term indices.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .fis import Fis, FuzzyController, FuzzyRule, MembershipFunction, MFKind

N_INPUTS = 3
N_VARIABLES = N_INPUTS + 1
N_SYSTEMS = 2


class CodecError(ValueError):
    pass


@dataclass(frozen=True)
class Encoding:
    name: str
    n_mf: int
    hierarchical: bool

    @cached_property
    def kinds(self) -> tuple[MFKind, ...]:
        if self.hierarchical:
            inner = (MFKind.TRIANGULAR,) * (self.n_mf - 2)
            return (MFKind.LEFT_SHOULDER,) + inner + (MFKind.RIGHT_SHOULDER,)
        return (MFKind.TRIANGULAR,) * self.n_mf

    @property
    def params_per_variable(self) -> int:
        return sum(3 if k == MFKind.TRIANGULAR else 2 for k in self.kinds)

    @property
    def n_rules(self) -> int:
        return self.n_mf ** N_INPUTS

    @property
    def control_per_fis(self) -> int:
        return self.n_mf * N_INPUTS if self.hierarchical else 0

    @property
    def params_per_fis(self) -> int:
        return N_VARIABLES * self.params_per_variable + self.n_rules

    @property
    def genes_per_fis(self) -> int:
        return self.control_per_fis + self.params_per_fis

    @property
    def n_control(self) -> int:
        return N_SYSTEMS * self.control_per_fis

    @property
    def n_params(self) -> int:
        return N_SYSTEMS * self.params_per_fis

    @property
    def length(self) -> int:
        return self.n_control + self.n_params

    @cached_property
    def consequents(self) -> np.ndarray:
        return assign_consequents((self.n_mf,) * N_INPUTS, self.n_mf)

    @cached_property
    def anchors(self) -> np.ndarray:
        """Uniform-partition value of every MF parameter gene of one variable."""
        c = np.linspace(0.0, 1.0, self.n_mf)
        out = []
        for i, kind in enumerate(self.kinds):
            if kind == MFKind.TRIANGULAR:
                out += [c[max(i - 1, 0)], c[i], c[min(i + 1, self.n_mf - 1)]]
            elif kind == MFKind.LEFT_SHOULDER:
                out += [c[i], c[i + 1]]
            else:
                out += [c[i - 1], c[i]]
        return np.array(out)


CLASSIC = Encoding("classic", 3, False)
HIERARCHICAL = Encoding("hga", 5, True)


def get_encoding(scheme) -> Encoding:
    if isinstance(scheme, Encoding):
        return scheme
    key = str(scheme).lower()
    if key in ("classic", "ga"):
        return CLASSIC
    if key in ("hga", "hier", "hierarchical"):
        return HIERARCHICAL
    raise CodecError(f"unknown scheme {scheme!r}")


@dataclass(frozen=True, eq=False)
class Chromosome:
    """Binary control segment plus real parametric segment (empty control for classic)."""

    control: np.ndarray
    params: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "control", np.asarray(self.control, dtype=np.uint8).reshape(-1))
        object.__setattr__(self, "params", np.asarray(self.params, dtype=np.float64).reshape(-1))

    def __len__(self):
        return self.control.size + self.params.size

    def __eq__(self, other):
        return (isinstance(other, Chromosome)
                and np.array_equal(self.control, other.control)
                and np.array_equal(self.params, other.params))

    def to_line(self) -> str:
        bits = "".join("1" if b else "0" for b in self.control) or "-"
        return bits + " " + " ".join(repr(float(p)) for p in self.params)

    @classmethod
    def from_line(cls, line: str) -> "Chromosome":
        head, *rest = line.split()
        if head == "-":
            control = np.zeros(0, dtype=np.uint8)
        elif set(head) <= {"0", "1"}:
            control = np.array([int(ch) for ch in head], dtype=np.uint8)
        else:
            raise CodecError(f"bad control segment {head[:20]!r}")
        try:
            params = np.array([float(tok) for tok in rest])
        except ValueError as exc:
            raise CodecError(str(exc)) from None
        return cls(control, params)


@dataclass(frozen=True, eq=False)
class GeneBounds:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=np.float64)
        hi = np.asarray(self.upper, dtype=np.float64)
        if lo.shape != hi.shape or np.any(lo > hi):
            raise ValueError("bounds must have equal shapes with lower <= upper")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    def contains(self, params) -> bool:
        p = np.asarray(params)
        return bool(np.all(p >= self.lower) and np.all(p <= self.upper))


def assign_consequents(grid_shape, n_output_mfs: int) -> np.ndarray:
    """Output term per grid cell, growing with the summed antecedent indices."""
    grid_shape = tuple(grid_shape)
    top = sum(n - 1 for n in grid_shape)
    idx = np.indices(grid_shape).sum(axis=0)
    if top == 0:
        return np.zeros(grid_shape, dtype=np.int64)
    return np.floor(idx / top * (n_output_mfs - 1) + 0.5).astype(np.int64)


def default_bounds(scheme) -> GeneBounds:
    """MF genes may move halfway towards the neighbouring anchors; weights span [0, 1]."""
    enc = get_encoding(scheme)
    half = 0.5 / (enc.n_mf - 1)
    a = enc.anchors
    mf_lo = np.clip(a - half, 0.0, 1.0)
    mf_hi = np.clip(a + half, 0.0, 1.0)
    lo = np.concatenate([np.tile(mf_lo, N_VARIABLES), np.zeros(enc.n_rules)])
    hi = np.concatenate([np.tile(mf_hi, N_VARIABLES), np.ones(enc.n_rules)])
    return GeneBounds(np.tile(lo, N_SYSTEMS), np.tile(hi, N_SYSTEMS))


def seed_chromosome(scheme) -> Chromosome:
    """Uniform partition, all weights 1, every MF switched on."""
    enc = get_encoding(scheme)
    per_fis = np.concatenate([np.tile(enc.anchors, N_VARIABLES), np.ones(enc.n_rules)])
    return Chromosome(np.ones(enc.n_control, dtype=np.uint8), np.tile(per_fis, N_SYSTEMS))


def random_chromosome(scheme, bounds: GeneBounds | None = None, seed=None) -> Chromosome:
    enc = get_encoding(scheme)
    if bounds is None:
        bounds = default_bounds(enc)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    params = rng.uniform(bounds.lower, bounds.upper)
    control = rng.integers(0, 2, size=enc.n_control).astype(np.uint8)
    return Chromosome(control, params)


def _check_shape(enc: Encoding, c: Chromosome) -> None:
    if c.control.size != enc.n_control or c.params.size != enc.n_params:
        raise CodecError(
            f"{enc.name} chromosome needs {enc.n_control} control + {enc.n_params} "
            f"parametric genes, got {c.control.size} + {c.params.size}")
    if not np.all(np.isfinite(c.params)):
        raise CodecError("non-finite parametric gene")


def _decode_fis(enc: Encoding, bits: np.ndarray, genes: np.ndarray) -> Fis:
    ppv = enc.params_per_variable
    variables = []
    for v in range(N_VARIABLES):
        chunk = genes[v * ppv:(v + 1) * ppv]
        mfs = []
        pos = 0
        for m, kind in enumerate(enc.kinds):
            n = 3 if kind == MFKind.TRIANGULAR else 2
            params = np.clip(np.sort(chunk[pos:pos + n]), 0.0, 1.0)
            pos += n
            active = bool(bits[v * enc.n_mf + m]) if (v < N_INPUTS and bits.size) else True
            mfs.append(MembershipFunction(kind, tuple(params), active))
        variables.append(tuple(mfs))
    weights = genes[N_VARIABLES * ppv:]
    cons = enc.consequents
    rules = tuple(
        FuzzyRule(cell, int(cons[cell]), float(weights[i]))
        for i, cell in enumerate(itertools.product(range(enc.n_mf), repeat=N_INPUTS)))
    return Fis(tuple(variables[:N_INPUTS]), variables[N_INPUTS], rules)


def decode(scheme, c: Chromosome) -> FuzzyController:
    enc = get_encoding(scheme)
    _check_shape(enc, c)
    systems = []
    for f in range(N_SYSTEMS):
        bits = c.control[f * enc.control_per_fis:(f + 1) * enc.control_per_fis]
        genes = c.params[f * enc.params_per_fis:(f + 1) * enc.params_per_fis]
        systems.append(_decode_fis(enc, bits, genes))
    return FuzzyController(systems[0], systems[1], {"scheme": enc.name})


def decode_classic(c: Chromosome) -> FuzzyController:
    return decode(CLASSIC, c)


def decode_hierarchical(c: Chromosome) -> FuzzyController:
    return decode(HIERARCHICAL, c)


def _encode_fis(enc: Encoding, fis: Fis):
    variables = list(fis.input_mfs) + [fis.output_mfs]
    if len(variables) != N_VARIABLES or any(len(v) != enc.n_mf for v in variables):
        raise CodecError(f"system shape does not match the {enc.name} encoding")
    genes, bits = [], []
    for v, mfs in enumerate(variables):
        for mf, kind in zip(mfs, enc.kinds):
            if mf.kind != kind:
                raise CodecError(f"expected {kind.name}, found {mf.kind.name}")
            genes.extend(mf.params)
            if v < N_INPUTS:
                bits.append(1 if mf.active else 0)
            elif not mf.active:
                raise CodecError("output MFs carry no control gene and must stay active")
    cells = list(itertools.product(range(enc.n_mf), repeat=N_INPUTS))
    weight = {r.antecedents: r for r in fis.rules}
    if len(weight) != len(cells) or len(fis.rules) != len(cells):
        raise CodecError("rule base is not a full grid")
    for cell in cells:
        rule = weight.get(cell)
        if rule is None or rule.consequent != enc.consequents[cell]:
            raise CodecError(f"rule for cell {cell} missing or has a foreign consequent")
        genes.append(rule.weight)
    if not enc.hierarchical:
        if not all(bits):
            raise CodecError("classic encoding cannot represent inactive MFs")
        bits = []
    return bits, genes


def encode(scheme, controller: FuzzyController) -> Chromosome:
    enc = get_encoding(scheme)
    bits, genes = [], []
    for fis in (controller.alpha, controller.beta):
        b, g = _encode_fis(enc, fis)
        bits += b
        genes += g
    return Chromosome(np.array(bits, dtype=np.uint8), np.array(genes))


def baseline_controller(scheme) -> FuzzyController:
    """Hand-built controller on the uniform partition with unit weights."""
    enc = get_encoding(scheme)
    step = 1.0 / (enc.n_mf - 1)
    c = [i * step for i in range(enc.n_mf)]
    c[-1] = 1.0
    mfs = []
    for i, kind in enumerate(enc.kinds):
        if kind == MFKind.LEFT_SHOULDER:
            mfs.append(MembershipFunction.left_shoulder(c[0], c[1]))
        elif kind == MFKind.RIGHT_SHOULDER:
            mfs.append(MembershipFunction.right_shoulder(c[-2], c[-1]))
        else:
            mfs.append(MembershipFunction.triangular(c[max(i - 1, 0)], c[i], c[min(i + 1, enc.n_mf - 1)]))
    mfs = tuple(mfs)
    rules = []
    for cell in itertools.product(range(enc.n_mf), repeat=N_INPUTS):
        rules.append(FuzzyRule(cell, int(enc.consequents[cell]), 1.0))
    fis = Fis((mfs,) * N_INPUTS, mfs, tuple(rules))
    return FuzzyController(fis, fis, {"scheme": enc.name})

"""Mamdani fuzzy inference with weighted rules and Mean-of-Maximum output.

Conjunction and implication are both ``min`` (clipping), aggregation is
``max``. A rule weight scales the firing strength before clipping. All
universes are the normalized interval [0, 1].

Inference runs through compiled kernels. ``Fis.infer`` computes the Mean of
Maximum over the exact maximizer set of the aggregate; ``Fis.infer_sampled``
evaluates the same aggregate on ``defuzz_resolution`` uniform samples and
hands it to :func:`defuzzify_mom`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import IntEnum
from functools import cached_property
from typing import Sequence

import numpy as np

from . import _kernels


class InvalidMembershipError(ValueError):
    """Membership function parameters break their ordering or range."""


class NoRuleFired(ArithmeticError):
    """Every active rule has zero firing strength for the given inputs."""


class MFKind(IntEnum):
    TRIANGULAR = _kernels.TRIANGULAR
    LEFT_SHOULDER = _kernels.LEFT_SHOULDER
    RIGHT_SHOULDER = _kernels.RIGHT_SHOULDER


_N_PARAMS = {MFKind.TRIANGULAR: 3, MFKind.LEFT_SHOULDER: 2, MFKind.RIGHT_SHOULDER: 2}


@dataclass(frozen=True)
class MembershipFunction:
    """Triangular or shoulder fuzzy set on [0, 1].

    ``LEFT_SHOULDER(p1, p2)`` is 1 on ``[0, p1]`` and falls linearly to 0 at
    ``p2``; ``RIGHT_SHOULDER(p1, p2)`` mirrors it, rising from ``p1`` to
    reach 1 at ``p2``.
    """

    kind: MFKind
    params: tuple[float, ...]
    active: bool = True

    def __post_init__(self):
        object.__setattr__(self, "kind", MFKind(self.kind))
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        check_params(self.kind, self.params)

    @classmethod
    def triangular(cls, a, b, c, active=True):
        return cls(MFKind.TRIANGULAR, (a, b, c), active)

    @classmethod
    def left_shoulder(cls, p1, p2, active=True):
        return cls(MFKind.LEFT_SHOULDER, (p1, p2), active)

    @classmethod
    def right_shoulder(cls, p1, p2, active=True):
        return cls(MFKind.RIGHT_SHOULDER, (p1, p2), active)

    @property
    def center(self) -> float:
        """Abscissa of the peak (plateau edge for shoulders)."""
        if self.kind == MFKind.TRIANGULAR:
            return self.params[1]
        if self.kind == MFKind.LEFT_SHOULDER:
            return self.params[0]
        return self.params[1]

    def __call__(self, x: float) -> float:
        return eval_membership(self, x)

    def packed(self) -> np.ndarray:
        p = np.zeros(3)
        p[: len(self.params)] = self.params
        return p


def check_params(kind: MFKind, params: Sequence[float]) -> None:
    n = _N_PARAMS[MFKind(kind)]
    if len(params) != n:
        raise InvalidMembershipError(f"{MFKind(kind).name} takes {n} parameters, got {len(params)}")
    if any(not (0.0 <= p <= 1.0) for p in params):
        raise InvalidMembershipError(f"parameters outside [0, 1]: {tuple(params)}")
    if any(params[i] > params[i + 1] for i in range(n - 1)):
        raise InvalidMembershipError(f"parameters not ordered: {tuple(params)}")


def eval_membership(mf: MembershipFunction, x: float) -> float:
    """Degree of ``x`` in ``mf``; piecewise linear and 0 outside the support."""
    check_params(mf.kind, mf.params)
    return float(_kernels.mf_degree(int(mf.kind), mf.packed(), float(x)))


@dataclass(frozen=True)
class FuzzyRule:
    antecedents: tuple[int, ...]
    consequent: int
    weight: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "antecedents", tuple(int(i) for i in self.antecedents))
        object.__setattr__(self, "weight", float(self.weight))
        if not 0.0 <= self.weight <= 1.0:
            raise ValueError(f"rule weight {self.weight} outside [0, 1]")


@dataclass(frozen=True)
class _Packed:
    in_kind: np.ndarray
    in_params: np.ndarray
    in_active: np.ndarray
    out_kind: np.ndarray
    out_params: np.ndarray
    rule_ante: np.ndarray
    rule_cons: np.ndarray
    rule_w: np.ndarray

    def args(self):
        return (self.in_kind, self.in_params, self.in_active, self.out_kind,
                self.out_params, self.rule_ante, self.rule_cons, self.rule_w)


@dataclass(frozen=True)
class Fis:
    """A MISO Mamdani system with three inputs on [0, 1].

    ``input_mfs[v]`` lists the terms of input ``v`` in label order. A rule
    takes part in inference only when every antecedent term it names is
    active.
    """

    input_mfs: tuple[tuple[MembershipFunction, ...], ...]
    output_mfs: tuple[MembershipFunction, ...]
    rules: tuple[FuzzyRule, ...]
    defuzz_resolution: int = 1001
    conjunction_norm: str = "min"
    implication_norm: str = "min"

    def __post_init__(self):
        object.__setattr__(self, "input_mfs", tuple(tuple(v) for v in self.input_mfs))
        object.__setattr__(self, "output_mfs", tuple(self.output_mfs))
        object.__setattr__(self, "rules", tuple(self.rules))
        if self.conjunction_norm != "min" or self.implication_norm != "min":
            raise ValueError("only the min t-norm is supported")
        if self.defuzz_resolution < 2:
            raise ValueError("defuzz_resolution must be at least 2")
        for v, mfs in enumerate(self.input_mfs):
            centers = [mf.center for mf in mfs]
            if any(centers[i] > centers[i + 1] for i in range(len(centers) - 1)):
                raise InvalidMembershipError(f"input {v}: MF centers out of label order {centers}")
        n_in = len(self.input_mfs)
        for r in self.rules:
            if len(r.antecedents) != n_in:
                raise ValueError(f"rule {r} needs {n_in} antecedents")
            for v, m in enumerate(r.antecedents):
                if not 0 <= m < len(self.input_mfs[v]):
                    raise ValueError(f"rule {r} references missing MF {m} of input {v}")
            if not 0 <= r.consequent < len(self.output_mfs):
                raise ValueError(f"rule {r} references missing output MF")

    @cached_property
    def _packed(self) -> _Packed:
        n_var = len(self.input_mfs)
        n_mf = max(len(v) for v in self.input_mfs)
        in_kind = np.zeros((n_var, n_mf), dtype=np.int64)
        in_params = np.zeros((n_var, n_mf, 3))
        in_active = np.zeros((n_var, n_mf), dtype=np.bool_)
        for v, mfs in enumerate(self.input_mfs):
            for m, mf in enumerate(mfs):
                in_kind[v, m] = int(mf.kind)
                in_params[v, m] = mf.packed()
                in_active[v, m] = mf.active
        out_kind = np.array([int(mf.kind) for mf in self.output_mfs], dtype=np.int64)
        out_params = np.array([mf.packed() for mf in self.output_mfs]).reshape(-1, 3)
        rule_ante = np.array([r.antecedents for r in self.rules], dtype=np.int64).reshape(-1, n_var)
        rule_cons = np.array([r.consequent for r in self.rules], dtype=np.int64)
        rule_w = np.array([r.weight for r in self.rules], dtype=np.float64)
        return _Packed(in_kind, in_params, in_active, out_kind, out_params,
                       rule_ante, rule_cons, rule_w)

    def is_rule_active(self, rule: FuzzyRule) -> bool:
        return all(self.input_mfs[v][m].active for v, m in enumerate(rule.antecedents))

    def active_rule_count(self) -> int:
        return sum(1 for r in self.rules if self.is_rule_active(r))

    def active_mf_counts(self) -> tuple[int, ...]:
        return tuple(sum(mf.active for mf in mfs) for mfs in self.input_mfs)

    def consequent_strengths(self, inputs: Sequence[float]) -> np.ndarray:
        x = _as_inputs(inputs, len(self.input_mfs))
        p = self._packed
        return _kernels.consequent_strengths(
            p.in_kind, p.in_params, p.in_active, len(self.output_mfs),
            p.rule_ante, p.rule_cons, p.rule_w, x)

    def infer(self, inputs: Sequence[float]) -> float:
        x = _as_inputs(inputs, len(self.input_mfs))
        y = _kernels.fis_infer(*self._packed.args(), x)
        if math.isnan(y):
            raise NoRuleFired(f"no active rule fires for inputs {tuple(x)}")
        return float(y)

    def aggregate(self, inputs: Sequence[float], grid: np.ndarray | None = None):
        """Sampled aggregate output set; returns ``(grid, membership)``."""
        if grid is None:
            grid = np.linspace(0.0, 1.0, self.defuzz_resolution)
        s = self.consequent_strengths(inputs)
        agg = np.zeros_like(grid)
        for k, mf in enumerate(self.output_mfs):
            if s[k] > 0:
                mu = np.array([_kernels.mf_degree(int(mf.kind), mf.packed(), g) for g in grid])
                np.maximum(agg, np.minimum(mu, s[k]), out=agg)
        return grid, agg

    def infer_sampled(self, inputs: Sequence[float]) -> float:
        grid, agg = self.aggregate(inputs)
        return defuzzify_mom(agg, grid)

    def to_dict(self) -> dict:
        return {
            "input_mfs": [[_mf_to_dict(mf) for mf in mfs] for mfs in self.input_mfs],
            "output_mfs": [_mf_to_dict(mf) for mf in self.output_mfs],
            "rules": [{"antecedents": list(r.antecedents), "consequent": r.consequent,
                       "weight": r.weight} for r in self.rules],
            "defuzz_resolution": self.defuzz_resolution,
            "conjunction_norm": self.conjunction_norm,
            "implication_norm": self.implication_norm,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Fis":
        return cls(
            input_mfs=tuple(tuple(_mf_from_dict(m) for m in mfs) for mfs in d["input_mfs"]),
            output_mfs=tuple(_mf_from_dict(m) for m in d["output_mfs"]),
            rules=tuple(FuzzyRule(tuple(r["antecedents"]), r["consequent"], r["weight"])
                        for r in d["rules"]),
            defuzz_resolution=d.get("defuzz_resolution", 1001),
            conjunction_norm=d.get("conjunction_norm", "min"),
            implication_norm=d.get("implication_norm", "min"),
        )


def _as_inputs(inputs, n) -> np.ndarray:
    x = np.asarray(inputs, dtype=np.float64).reshape(-1)
    if x.shape[0] != n:
        raise ValueError(f"expected {n} inputs, got {x.shape[0]}")
    if np.any(~np.isfinite(x)) or np.any(x < 0) or np.any(x > 1):
        raise ValueError(f"inputs must lie in [0, 1], got {tuple(x)}")
    return x


def _mf_to_dict(mf: MembershipFunction) -> dict:
    return {"kind": mf.kind.name.lower(), "params": list(mf.params), "active": mf.active}


def _mf_from_dict(d: dict) -> MembershipFunction:
    return MembershipFunction(MFKind[d["kind"].upper()], tuple(d["params"]), bool(d.get("active", True)))


def defuzzify_mom(aggregate, grid=None) -> float:
    """Mean of the abscissae where a sampled fuzzy set attains its maximum.

    ``grid`` defaults to uniform samples over [0, 1] matching the length of
    ``aggregate``.
    """
    agg = np.asarray(aggregate, dtype=np.float64)
    if grid is None:
        grid = np.linspace(0.0, 1.0, agg.shape[0])
    top = agg.max() if agg.size else 0.0
    if not top > 0:
        raise NoRuleFired("aggregate output set is empty")
    return float(np.mean(np.asarray(grid)[agg == top]))


def active_rule_count(fis: Fis) -> int:
    return fis.active_rule_count()


def infer(fis: Fis, inputs: Sequence[float]) -> float:
    return fis.infer(inputs)


@dataclass(frozen=True)
class FuzzyController:
    """The pair of systems computing the sell fraction (alpha) and buy fraction (beta).

    Inputs of both are (balance, soc, price); alpha sees the selling price,
    beta the buying price.
    """

    alpha: Fis
    beta: Fis
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def degenerate(self) -> bool:
        return self.alpha.active_rule_count() == 0 or self.beta.active_rule_count() == 0

    def rule_counts(self) -> tuple[int, int]:
        return self.alpha.active_rule_count(), self.beta.active_rule_count()

    def to_json(self) -> str:
        return json.dumps({"alpha": self.alpha.to_dict(), "beta": self.beta.to_dict(),
                           "meta": self.meta}, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "FuzzyController":
        d = json.loads(text)
        return cls(Fis.from_dict(d["alpha"]), Fis.from_dict(d["beta"]), d.get("meta", {}))

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_json())

    @classmethod
    def load(cls, path) -> "FuzzyController":
        with open(path) as fh:
            return cls.from_json(fh.read())

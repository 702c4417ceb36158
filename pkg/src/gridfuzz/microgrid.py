"""Time-stepped microgrid with a battery, driven by a fuzzy controller.

Each sample is routed by :func:`classify`. Forced routes move the whole
surplus or deficit to the grid (or top the battery back up to ``soc_min``);
fuzzy routes split it with ``alpha`` (sold share of a surplus) or ``beta``
(bought share of a deficit) and send the rest through the battery. Energy the
battery cannot absorb or deliver goes to the grid in the same step.

Ledger energies are magnitudes at the battery/grid terminals; conversion
losses only show up in the SOC update.
"""

from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass, replace
from enum import IntEnum

import numpy as np

from . import _kernels
from .data import NormalizationRanges, Scenario, extract_ranges
from .fis import Fis, FuzzyController, FuzzyRule, MembershipFunction, NoRuleFired


class ModelRangeError(ValueError):
    pass


class Route(IntEnum):
    IDLE = _kernels.IDLE
    FORCED_SELL = _kernels.FORCED_SELL
    FORCED_BUY = _kernels.FORCED_BUY
    FORCED_CHARGE = _kernels.FORCED_CHARGE
    FUZZY_ALPHA = _kernels.FUZZY_ALPHA
    FUZZY_BETA = _kernels.FUZZY_BETA


_TAG_NAMES = {
    Route.IDLE: "Idle",
    Route.FORCED_SELL: "ForcedSell",
    Route.FORCED_BUY: "ForcedBuy",
    Route.FORCED_CHARGE: "ForcedCharge",
    Route.FUZZY_ALPHA: "FuzzyAlpha",
    Route.FUZZY_BETA: "FuzzyBeta",
}
_TAG_VALUES = {v: k for k, v in _TAG_NAMES.items()}


@dataclass(frozen=True)
class BatteryModel:
    """Battery parameters.

    ``round_trip_efficiency`` is split evenly (square root) between charge
    and discharge in ``"fixed"`` mode. ``"circuit"`` mode derives each
    direction from the internal resistance at the actual current, with the
    open-circuit voltage taken as the nominal voltage.
    """

    energy_capacity_kwh: float = 24.0
    charge_capacity_ah: float = 80.0
    round_trip_efficiency: float = 0.9
    r_charge_ohm: float = 0.0015
    r_discharge_ohm: float = 0.0015
    max_c_rate: float = 8.0
    soc_min: float = 0.15
    soc_max: float = 1.0
    soc_ini: float = 0.8
    efficiency_mode: str = "fixed"

    def __post_init__(self):
        if not 0.0 <= self.soc_min < self.soc_max <= 1.0:
            raise ValueError("need 0 <= soc_min < soc_max <= 1")
        if not 0.0 < self.round_trip_efficiency <= 1.0:
            raise ValueError("round-trip efficiency must lie in (0, 1]")
        if min(self.charge_capacity_ah, self.max_c_rate, self.energy_capacity_kwh) <= 0:
            raise ValueError("capacities and C-rate must be positive")
        if min(self.r_charge_ohm, self.r_discharge_ohm) < 0:
            raise ValueError("internal resistance must be non-negative")
        if self.efficiency_mode not in ("fixed", "circuit"):
            raise ValueError(f"unknown efficiency mode {self.efficiency_mode!r}")
        if not 0.0 <= self.soc_ini <= 1.0:
            raise ValueError("soc_ini must lie in [0, 1]")

    @property
    def nominal_voltage(self) -> float:
        return self.energy_capacity_kwh * 1000.0 / self.charge_capacity_ah

    @property
    def max_current(self) -> float:
        return self.max_c_rate * self.charge_capacity_ah

    @property
    def power_limit_kw(self) -> float:
        return self.max_current * self.nominal_voltage / 1000.0

    @property
    def eta_charge(self) -> float:
        return math.sqrt(self.round_trip_efficiency)

    @property
    def eta_discharge(self) -> float:
        return math.sqrt(self.round_trip_efficiency)

    def packed(self) -> np.ndarray:
        return np.array([
            self.energy_capacity_kwh, self.soc_min, self.soc_max, self.power_limit_kw,
            0.0 if self.efficiency_mode == "fixed" else 1.0,
            self.eta_charge, self.eta_discharge, self.nominal_voltage,
            self.r_charge_ohm, self.r_discharge_ohm,
        ])

    def to_dict(self) -> dict:
        return dict(self.__dict__)


# Toshiba SCiB presets; soc_max is not tabulated and set to full charge.
CONFIG1 = BatteryModel(round_trip_efficiency=0.86, r_charge_ohm=0.002, r_discharge_ohm=0.002,
                       soc_ini=0.40, soc_min=0.0)
CONFIG2 = BatteryModel(round_trip_efficiency=0.90, r_charge_ohm=0.0015, r_discharge_ohm=0.0015,
                       soc_ini=0.80, soc_min=0.15)
PRESETS = {"config1": CONFIG1, "config2": CONFIG2}


def battery_preset(name: str, **overrides) -> BatteryModel:
    try:
        batt = PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown battery preset {name!r}; choose from {sorted(PRESETS)}") from None
    return replace(batt, **overrides) if overrides else batt


def circuit_efficiency(batt: BatteryModel, i_bat: float, direction: str) -> float:
    """Terminal efficiency at current ``i_bat`` (A) from the equivalent circuit.

    Charging uses V/(V + R i) so that it never exceeds 1; discharging uses
    (V - R i)/V.
    """
    v = batt.nominal_voltage
    i = abs(i_bat)
    if direction == "charge":
        den = v + batt.r_charge_ohm * i
        if den <= 0:
            raise ModelRangeError("non-positive denominator")
        return v / den
    if direction == "discharge":
        if v - batt.r_discharge_ohm * i <= 0:
            raise ModelRangeError(f"current {i_bat} A exceeds the model range")
        return (v - batt.r_discharge_ohm * i) / v
    raise ValueError(f"direction must be 'charge' or 'discharge', not {direction!r}")


def _mode(batt):
    return 0 if batt.efficiency_mode == "fixed" else 1


def battery_charge(batt: BatteryModel, soc: float, e_offered: float, dt: float = 0.25):
    """Store up to ``e_offered`` kWh; returns ``(absorbed_kwh, new_soc)``."""
    if e_offered < 0:
        raise ValueError("offered energy must be non-negative")
    e, new, _ = _kernels.charge(soc, e_offered, dt, batt.energy_capacity_kwh, batt.soc_max,
                                batt.power_limit_kw, _mode(batt), batt.eta_charge,
                                batt.nominal_voltage, batt.r_charge_ohm)
    return e, new


def battery_discharge(batt: BatteryModel, soc: float, e_requested: float, dt: float = 0.25):
    """Deliver up to ``e_requested`` kWh; returns ``(delivered_kwh, new_soc)``."""
    if e_requested < 0:
        raise ValueError("requested energy must be non-negative")
    e, new, _ = _kernels.discharge(soc, e_requested, dt, batt.energy_capacity_kwh, batt.soc_min,
                                   batt.power_limit_kw, _mode(batt), batt.eta_discharge,
                                   batt.nominal_voltage, batt.r_discharge_ohm)
    return e, new


def balance(p_agg: float, d_agg: float) -> float:
    return p_agg - d_agg


@dataclass(frozen=True)
class MgState:
    balance: float
    soc: float
    c_buy: float
    c_sell: float


def classify(state: MgState, batt: BatteryModel) -> Route:
    return Route(_kernels.route(state.balance, state.soc, batt.soc_min, batt.soc_max))


def normalize_inputs(bal: float, soc: float, price: float, ranges: NormalizationRanges,
                     batt: BatteryModel, price_kind: str = "sell") -> tuple[float, float, float]:
    """Min-max scale (balance, soc, price) into [0, 1], clamping outside the range."""
    if price_kind == "sell":
        lo, hi = ranges.sell_min, ranges.sell_max
    else:
        lo, hi = ranges.buy_min, ranges.buy_max
    return (_kernels.norm01(bal, ranges.bal_min, ranges.bal_max),
            _kernels.norm01(soc, batt.soc_min, batt.soc_max),
            _kernels.norm01(price, lo, hi))


@dataclass(frozen=True)
class StepLedger:
    t: int
    balance: float
    soc: float
    e_sold: float
    e_bought: float
    e_charged: float
    e_discharged: float
    revenue: float
    expense: float
    profit: float
    route: Route
    fis_output: float = math.nan

    @property
    def action_tag(self) -> str:
        name = _TAG_NAMES[self.route]
        if self.route in (Route.FUZZY_ALPHA, Route.FUZZY_BETA):
            return f"{name}({self.fis_output!r})"
        return name


def _fuzzy_value(fis: Fis, x) -> float:
    if fis.active_rule_count() == 0:
        return 1.0
    try:
        return fis.infer(x)
    except NoRuleFired:
        return 1.0


def step(soc: float, sample: tuple, controller: FuzzyController, batt: BatteryModel,
         ranges: NormalizationRanges, dt: float = 0.25, t: int = 0):
    """One controlled sample; ``sample`` is (production, demand, c_buy, c_sell).

    Returns ``(new_soc, StepLedger)``. A degenerate system or one where no rule
    fires acts as the pure-grid choice (alpha = 1 or beta = 1).
    """
    prod, dem, c_buy, c_sell = (float(v) for v in sample)
    bal = prod - dem
    r = classify(MgState(bal, soc, c_buy, c_sell), batt)
    alpha = beta = 1.0
    if r == Route.FUZZY_ALPHA:
        alpha = _fuzzy_value(controller.alpha, normalize_inputs(bal, soc, c_sell, ranges, batt, "sell"))
    elif r == Route.FUZZY_BETA:
        beta = _fuzzy_value(controller.beta, normalize_inputs(bal, soc, c_buy, ranges, batt, "buy"))
    out = np.zeros(11)
    new = _kernels.step_kernel(soc, prod, dem, c_buy, c_sell, dt, batt.packed(), alpha, beta, out)
    return new, _row_to_step(t, out)


def _row_to_step(t, row) -> StepLedger:
    return StepLedger(int(t), *(float(v) for v in row[:9]), Route(int(row[9])), float(row[10]))


LEDGER_COLUMNS = ("t", "balance", "soc", "e_sold", "e_bought", "e_charged", "e_discharged",
                  "revenue", "expense", "profit", "action_tag")


@dataclass(frozen=True, eq=False)
class Ledger:
    """Per-step record of a simulation, one row per sample (soc is post-step)."""

    data: np.ndarray
    soc_ini: float = math.nan

    def __len__(self):
        return self.data.shape[0]

    def column(self, name: str) -> np.ndarray:
        idx = {"balance": 0, "soc": 1, "e_sold": 2, "e_bought": 3, "e_charged": 4,
               "e_discharged": 5, "revenue": 6, "expense": 7, "profit": 8, "route": 9,
               "fis_output": 10}[name]
        return self.data[:, idx]

    def __getattr__(self, name):
        if name in ("balance", "soc", "e_sold", "e_bought", "e_charged", "e_discharged",
                    "revenue", "expense", "profit", "fis_output"):
            return self.column(name)
        raise AttributeError(name)

    @property
    def routes(self) -> np.ndarray:
        return self.data[:, 9].astype(int)

    def rows(self):
        for t in range(len(self)):
            yield _row_to_step(t, self.data[t])

    def totals(self) -> dict:
        return {"expense": float(self.expense.sum()), "revenue": float(self.revenue.sum()),
                "profit": float(self.profit.sum())}

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(LEDGER_COLUMNS)
            for s in self.rows():
                w.writerow([s.t] + [repr(v) for v in (s.balance, s.soc, s.e_sold, s.e_bought,
                                                      s.e_charged, s.e_discharged, s.revenue,
                                                      s.expense, s.profit)] + [s.action_tag])

    @classmethod
    def from_csv(cls, path) -> "Ledger":
        rows = []
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or tuple(h.strip() for h in header) != LEDGER_COLUMNS:
                raise ValueError(f"{path}: ledger header must be {','.join(LEDGER_COLUMNS)}")
            for lineno, row in enumerate(reader, start=1):
                if not row:
                    continue
                try:
                    if len(row) != len(LEDGER_COLUMNS) or int(row[0]) != len(rows):
                        raise ValueError("wrong column count or step index")
                    nums = [float(v) for v in row[1:10]]
                    route, value = _parse_tag(row[10])
                except ValueError as exc:
                    raise ValueError(f"{path}: row {lineno}: malformed ledger row ({exc})") from None
                rows.append(nums + [float(route), value])
        return cls(np.array(rows, dtype=np.float64).reshape(-1, 11))


_TAG_RE = re.compile(r"^(FuzzyAlpha|FuzzyBeta)\((.+)\)$")


def _parse_tag(tag: str):
    tag = tag.strip()
    m = _TAG_RE.match(tag)
    if m:
        return _TAG_VALUES[m.group(1)], float(m.group(2))
    if tag in _TAG_VALUES:
        return _TAG_VALUES[tag], math.nan
    raise ValueError(f"unknown action tag {tag!r}")


@dataclass(frozen=True, eq=False)
class SimResult:
    total_profit: float
    ledger: Ledger | None


_NO_LEDGER = np.zeros((0, 11))


def _fis_args(fis: Fis):
    p = fis._packed
    return p.args() + (fis.active_rule_count() > 0,)


def simulate(scenario: Scenario, batt: BatteryModel, controller: FuzzyController,
             ranges: NormalizationRanges | None = None, record: bool = True,
             soc_ini: float | None = None) -> SimResult:
    """Run the controller over the whole scenario from ``batt.soc_ini``.

    ``ranges`` defaults to the extrema of the scenario itself.
    """
    if len(scenario) == 0:
        raise ValueError("empty scenario")
    if ranges is None:
        ranges = extract_ranges(scenario)
    soc0 = batt.soc_ini if soc_ini is None else soc_ini
    ledger = np.zeros((len(scenario), 11)) if record else _NO_LEDGER
    total = _kernels.simulate_kernel(
        scenario.production, scenario.demand, scenario.c_buy, scenario.c_sell,
        float(scenario.dt), batt.packed(), float(soc0), ranges.as_array(),
        *_fis_args(controller.alpha), *_fis_args(controller.beta), ledger)
    return SimResult(float(total), Ledger(ledger, soc0) if record else None)


def simulate_reference(scenario: Scenario, batt: BatteryModel, controller: FuzzyController,
                       ranges: NormalizationRanges | None = None) -> SimResult:
    """Plain-Python fold of :func:`step`; slow, used to cross-check :func:`simulate`."""
    if ranges is None:
        ranges = extract_ranges(scenario)
    soc = batt.soc_ini
    rows = np.zeros((len(scenario), 11))
    for t in range(len(scenario)):
        soc, s = step(soc, (scenario.production[t], scenario.demand[t], scenario.c_buy[t],
                            scenario.c_sell[t]), controller, batt, ranges, scenario.dt, t)
        rows[t] = [s.balance, s.soc, s.e_sold, s.e_bought, s.e_charged, s.e_discharged,
                   s.revenue, s.expense, s.profit, int(s.route), s.fis_output]
    return SimResult(float(rows[:, 8].sum()), Ledger(rows, batt.soc_ini))


def no_storage_profit(scenario: Scenario) -> float:
    """Closed-form profit when every surplus is sold and every deficit bought."""
    bal = scenario.balance
    return float(np.sum((scenario.c_sell * np.maximum(bal, 0.0)
                         - scenario.c_buy * np.maximum(-bal, 0.0)) * scenario.dt))


def _everywhere():
    return MembershipFunction.left_shoulder(1.0, 1.0)


def constant_fis(value: float) -> Fis:
    """A single always-firing rule whose output set is a spike at ``value``."""
    return Fis(((_everywhere(),),) * 3, (MembershipFunction.triangular(value, value, value),),
               (FuzzyRule((0, 0, 0), 0, 1.0),))


def constant_controller(alpha: float, beta: float) -> FuzzyController:
    return FuzzyController(constant_fis(alpha), constant_fis(beta), {"scheme": "constant"})

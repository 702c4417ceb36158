"""Scenario time series: CSV ingestion, synthetic generation, train/test split."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

HEADER = ("timestamp_iso8601", "production_kw", "demand_kw",
          "c_buy_mu_per_kwh", "c_sell_mu_per_kwh")
DT_HOURS = 0.25


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Scenario:
    """Aggregate production/demand (kW) and grid tariffs (MU/kWh) on a uniform clock."""

    timestamps: np.ndarray
    production: np.ndarray
    demand: np.ndarray
    c_buy: np.ndarray
    c_sell: np.ndarray
    dt: float = DT_HOURS

    def __post_init__(self):
        ts = np.asarray(self.timestamps, dtype="datetime64[s]")
        cols = [np.array(getattr(self, k), dtype=np.float64)
                for k in ("production", "demand", "c_buy", "c_sell")]
        n = ts.shape[0]
        if any(c.shape != (n,) for c in cols):
            raise ScenarioError("all columns must be 1-D with equal length")
        object.__setattr__(self, "timestamps", ts)
        for k, c in zip(("production", "demand", "c_buy", "c_sell"), cols):
            c.setflags(write=False)
            object.__setattr__(self, k, c)
        if not self.dt > 0:
            raise ScenarioError("dt must be positive")
        _validate(self)

    def __len__(self):
        return self.timestamps.shape[0]

    @property
    def balance(self) -> np.ndarray:
        return self.production - self.demand

    @property
    def steps_per_day(self) -> int:
        return int(round(24.0 / self.dt))

    def window(self, start: int, stop: int) -> "Scenario":
        """Contiguous slice ``[start, stop)``."""
        sl = slice(start, stop)
        return Scenario(self.timestamps[sl], self.production[sl], self.demand[sl],
                        self.c_buy[sl], self.c_sell[sl], self.dt)

    def equals(self, other: "Scenario") -> bool:
        return (self.dt == other.dt
                and np.array_equal(self.timestamps, other.timestamps)
                and all(np.array_equal(getattr(self, k), getattr(other, k))
                        for k in ("production", "demand", "c_buy", "c_sell")))


def _validate(s: Scenario) -> None:
    for name, col in (("production_kw", s.production), ("demand_kw", s.demand)):
        bad = np.flatnonzero(~np.isfinite(col) | (col < 0))
        if bad.size:
            raise ScenarioError(f"row {bad[0] + 1}: {name} must be finite and >= 0, got {col[bad[0]]}")
    for name, col in (("c_buy_mu_per_kwh", s.c_buy), ("c_sell_mu_per_kwh", s.c_sell)):
        bad = np.flatnonzero(~np.isfinite(col) | (col <= 0))
        if bad.size:
            raise ScenarioError(f"row {bad[0] + 1}: {name} must be > 0, got {col[bad[0]]}")
    if len(s) > 1:
        step = np.timedelta64(int(round(s.dt * 3600)), "s")
        gaps = np.flatnonzero(np.diff(s.timestamps) != step)
        if gaps.size:
            raise ScenarioError(
                f"row {gaps[0] + 2}: non-uniform spacing, expected {s.dt} h after "
                f"{s.timestamps[gaps[0]]} but found {s.timestamps[gaps[0] + 1]}")


def save_scenario(s: Scenario, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(HEADER)
        for i in range(len(s)):
            w.writerow((str(s.timestamps[i]), repr(float(s.production[i])), repr(float(s.demand[i])),
                        repr(float(s.c_buy[i])), repr(float(s.c_sell[i]))))


def load_scenario(path, dt: float | None = None) -> Scenario:
    """Read a scenario CSV; ``dt`` defaults to the spacing of the first two rows."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ScenarioError(f"{path}: empty file") from None
        missing = [h for h in HEADER if h not in header]
        if missing:
            raise ScenarioError(f"{path}: missing column(s) {', '.join(missing)}")
        pos = [header.index(h) for h in HEADER]
        ts, rows = [], []
        for lineno, row in enumerate(reader, start=1):
            if not row:
                continue
            try:
                ts.append(np.datetime64(row[pos[0]].strip(), "s"))
                rows.append([float(row[p]) for p in pos[1:]])
            except (ValueError, IndexError) as exc:
                raise ScenarioError(f"{path}: row {lineno}: {exc}") from None
    if not rows:
        raise ScenarioError(f"{path}: no samples")
    data = np.array(rows)
    if dt is None:
        dt = (ts[1] - ts[0]) / np.timedelta64(1, "h") if len(ts) > 1 else DT_HOURS
    return Scenario(np.array(ts), data[:, 0], data[:, 1], data[:, 2], data[:, 3], float(dt))


def split_train_test(s: Scenario) -> tuple[Scenario, Scenario]:
    """Odd-positioned samples (1st, 3rd, ...) train, even-positioned test.

    Each half is re-timed on the original ``dt`` from its first timestamp so
    it can be simulated as a contiguous series.
    """
    if len(s) < 2:
        raise ScenarioError("scenario too short to split (need at least 2 samples)")
    halves = []
    step = np.timedelta64(int(round(s.dt * 3600)), "s")
    for idx in (slice(0, None, 2), slice(1, None, 2)):
        ts = s.timestamps[idx]
        ts = ts[0] + step * np.arange(ts.shape[0])
        halves.append(Scenario(ts, s.production[idx], s.demand[idx], s.c_buy[idx],
                               s.c_sell[idx], s.dt))
    return halves[0], halves[1]


@dataclass(frozen=True)
class NormalizationRanges:
    bal_min: float
    bal_max: float
    buy_min: float
    buy_max: float
    sell_min: float
    sell_max: float

    @property
    def degenerate(self) -> tuple[str, ...]:
        """Names of signals whose range collapsed to a point (normalized to 0.5)."""
        pairs = (("balance", self.bal_min, self.bal_max), ("c_buy", self.buy_min, self.buy_max),
                 ("c_sell", self.sell_min, self.sell_max))
        return tuple(name for name, lo, hi in pairs if not hi > lo)

    def as_array(self) -> np.ndarray:
        return np.array([self.bal_min, self.bal_max, self.buy_min, self.buy_max,
                         self.sell_min, self.sell_max])

    def to_dict(self) -> dict:
        return {k: float(getattr(self, k)) for k in
                ("bal_min", "bal_max", "buy_min", "buy_max", "sell_min", "sell_max")}

    @classmethod
    def from_dict(cls, d: dict) -> "NormalizationRanges":
        return cls(**{k: float(v) for k, v in d.items()})


def extract_ranges(train: Scenario) -> NormalizationRanges:
    if len(train) == 0:
        raise ScenarioError("cannot extract ranges from an empty scenario")
    bal = train.balance
    return NormalizationRanges(float(bal.min()), float(bal.max()),
                               float(train.c_buy.min()), float(train.c_buy.max()),
                               float(train.c_sell.min()), float(train.c_sell.max()))


@dataclass(frozen=True)
class SynthParams:
    """Knobs of the synthetic generator. Prices are per band: (peak, shoulder, off-peak)."""

    start: str = "2024-03-01T00:00:00"
    pv_peak_kw: float = 22.0
    pv_sunrise_h: float = 6.5
    pv_sunset_h: float = 19.5
    pv_season_h: float = 1.5
    wind_rated_kw: float = 5.0
    wind_persistence: float = 0.97
    demand_base_kw: float = 3.0
    demand_morning_kw: float = 3.5
    demand_evening_kw: float = 6.5
    demand_noise: float = 0.08
    peak_hours: tuple[float, float] = (8.0, 19.0)
    offpeak_hours: tuple[float, float] = (23.0, 7.0)
    c_buy: tuple[float, float, float] = (0.28, 0.22, 0.14)
    c_sell: tuple[float, float, float] = (0.12, 0.08, 0.04)


def _tariff_band(hours: np.ndarray, p: SynthParams) -> np.ndarray:
    """0 = peak, 1 = shoulder, 2 = off-peak."""
    band = np.ones(hours.shape, dtype=int)
    lo, hi = p.peak_hours
    band[(hours >= lo) & (hours < hi)] = 0
    off_start, off_end = p.offpeak_hours
    band[(hours >= off_start) | (hours < off_end)] = 2
    return band


def synth_scenario(days: int, seed: int = 0, params: SynthParams | None = None) -> Scenario:
    """PV + wind production, two-peak residential demand, multi-hour tariffs.

    96 samples per day; deterministic for a given seed.
    """
    if days < 1:
        raise ScenarioError("days must be >= 1")
    p = params or SynthParams()
    rng = np.random.default_rng(seed)
    per_day = int(round(24 / DT_HOURS))
    n = days * per_day
    hours = (np.arange(n) % per_day) * DT_HOURS
    day = np.arange(n) // per_day
    start = np.datetime64(p.start, "s")
    ts = start + np.arange(n) * np.timedelta64(int(DT_HOURS * 3600), "s")
    doy = (ts.astype("datetime64[D]") - ts.astype("datetime64[Y]")).astype(int)

    # longer days in summer
    season = np.cos(2 * np.pi * (doy - 172) / 365.0)
    rise = p.pv_sunrise_h - p.pv_season_h * season
    sset = p.pv_sunset_h + p.pv_season_h * season
    phase = np.clip((hours - rise) / (sset - rise), 0.0, 1.0)
    clear = rng.beta(5.0, 2.0, size=days)[day]
    flicker = np.clip(1.0 + 0.1 * rng.standard_normal(n), 0.5, 1.3)
    pv = p.pv_peak_kw * (0.75 + 0.25 * season) * clear * np.sin(np.pi * phase) * flicker
    pv[(hours <= rise) | (hours >= sset)] = 0.0
    pv = np.maximum(pv, 0.0)

    z = np.empty(n)
    z[0] = rng.standard_normal()
    shocks = rng.standard_normal(n) * np.sqrt(1 - p.wind_persistence ** 2)
    for t in range(1, n):
        z[t] = p.wind_persistence * z[t - 1] + shocks[t]
    wind = p.wind_rated_kw * (1.0 / (1.0 + np.exp(-1.5 * (z - 0.3)))) ** 3

    weekend = ((ts.astype("datetime64[D]").astype(int) + 3) % 7) >= 5
    morning = p.demand_morning_kw * np.exp(-0.5 * ((hours - 7.5) / 1.2) ** 2)
    evening = p.demand_evening_kw * np.exp(-0.5 * ((hours - 19.5) / 1.8) ** 2)
    demand = (p.demand_base_kw + morning * np.where(weekend, 0.6, 1.0) + evening)
    demand *= np.clip(1.0 + p.demand_noise * rng.standard_normal(n), 0.5, 1.5)

    band = _tariff_band(hours, p)
    c_buy = np.asarray(p.c_buy)[band]
    c_sell = np.asarray(p.c_sell)[band]
    return Scenario(ts, np.round(pv + wind, 6), np.round(demand, 6), c_buy, c_sell, DT_HOURS)

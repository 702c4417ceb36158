import itertools

import numpy as np
import pytest

from gridfuzz.fis import Fis, FuzzyRule, MembershipFunction


def random_free_fis(rng, n_mf=5, n_out=5, p_active=0.8):
    """Random three-input system with shoulders at the ends, random consequents."""
    variables = []
    for _ in range(4):
        mfs = []
        for m in range(n_mf):
            if m == 0:
                p = np.sort(rng.uniform(0, 0.5, 2))
                mfs.append(MembershipFunction.left_shoulder(*p))
            elif m == n_mf - 1:
                p = np.sort(rng.uniform(0.5, 1, 2))
                mfs.append(MembershipFunction.right_shoulder(*p))
            else:
                p = np.sort(rng.uniform(0, 1, 3))
                mfs.append(MembershipFunction.triangular(*p))
        mfs.sort(key=lambda mf: mf.center)
        variables.append(mfs)
    inputs = [[MembershipFunction(mf.kind, mf.params, bool(rng.random() < p_active)) for mf in v]
              for v in variables[:3]]
    outputs = [MembershipFunction(mf.kind, mf.params) for mf in variables[3][:n_out]]
    rules = [FuzzyRule(cell, int(rng.integers(0, len(outputs))), float(rng.random()))
             for cell in itertools.product(range(n_mf), repeat=3)]
    return Fis(tuple(map(tuple, inputs)), tuple(outputs), tuple(rules))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def make_scenario(prod, dem, c_buy, c_sell, dt=0.25, start="2024-01-01T00:00:00"):
    from gridfuzz.data import Scenario

    n = len(prod)
    step = np.timedelta64(int(round(dt * 3600)), "s")
    ts = np.datetime64(start, "s") + step * np.arange(n)
    as_col = lambda v: np.broadcast_to(np.asarray(v, dtype=float), (n,))
    return Scenario(ts, as_col(prod), as_col(dem), as_col(c_buy), as_col(c_sell), dt)


def random_scenario(rng, n=None):
    n = int(rng.integers(1, 300)) if n is None else n
    prod = rng.uniform(0, 20, n) * (rng.random(n) < 0.8)
    dem = rng.uniform(0, 15, n)
    return make_scenario(prod, dem, rng.uniform(0.05, 0.4, n), rng.uniform(0.01, 0.2, n))


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)

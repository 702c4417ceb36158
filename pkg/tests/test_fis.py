import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gridfuzz.fis import (Fis, FuzzyController, FuzzyRule, InvalidMembershipError,
                          MembershipFunction, NoRuleFired, active_rule_count, defuzzify_mom,
                          eval_membership)

from conftest import random_free_fis
from oracles import brute_force_mamdani

TRI = MembershipFunction.triangular
LS = MembershipFunction.left_shoulder
RS = MembershipFunction.right_shoulder


def test_triangle_peak_and_slope():
    mf = TRI(0, 0.5, 1)
    assert eval_membership(mf, 0.5) == 1.0
    assert eval_membership(mf, 0.25) == 0.5


def test_left_shoulder_plateau():
    assert eval_membership(LS(0.1, 0.3), 0.05) == 1.0
    assert eval_membership(LS(0.1, 0.3), 0.2) == pytest.approx(0.5)
    assert eval_membership(LS(0.1, 0.3), 0.9) == 0.0


def test_right_shoulder_mirrors_left():
    mf = RS(0.6, 0.8)
    assert eval_membership(mf, 0.95) == 1.0
    assert eval_membership(mf, 0.7) == pytest.approx(0.5)
    assert eval_membership(mf, 0.1) == 0.0


def test_zero_outside_support():
    mf = TRI(0.2, 0.4, 0.6)
    assert eval_membership(mf, 0.1) == 0.0
    assert eval_membership(mf, 0.7) == 0.0


@pytest.mark.parametrize("params", [(0.5, 0.2, 0.9), (0.1, 0.9, 0.3), (-0.1, 0.2, 0.3), (0.2, 0.3, 1.2)])
def test_malformed_triangle_rejected(params):
    with pytest.raises(InvalidMembershipError):
        TRI(*params)


def test_malformed_shoulder_rejected():
    with pytest.raises(InvalidMembershipError):
        LS(0.6, 0.2)


@st.composite
def membership_functions(draw):
    kind = draw(st.sampled_from(["tri", "ls", "rs"]))
    n = 3 if kind == "tri" else 2
    params = sorted(draw(st.lists(st.floats(0, 1), min_size=n, max_size=n)))
    return {"tri": TRI, "ls": LS, "rs": RS}[kind](*params)


@given(membership_functions(), st.floats(0, 1))
def test_degree_in_unit_interval(mf, x):
    assert 0.0 <= eval_membership(mf, x) <= 1.0


@given(membership_functions())
def test_degree_is_one_at_center(mf):
    assert eval_membership(mf, mf.center) == 1.0


def one_rule(consequent, weight=1.0):
    ins = (TRI(0.0, 0.2, 0.4), TRI(0.3, 0.5, 0.7), TRI(0.6, 0.8, 1.0))
    return Fis(tuple((mf,) for mf in ins), (consequent,), (FuzzyRule((0, 0, 0), 0, weight),))


def test_single_rule_at_peaks_gives_consequent_peak():
    fis = one_rule(TRI(0.4, 0.6, 0.8))
    assert fis.infer((0.2, 0.5, 0.8)) == pytest.approx(0.6, abs=1e-12)
    assert fis.infer_sampled((0.2, 0.5, 0.8)) == pytest.approx(0.6, abs=1e-12)


def test_all_zero_weights_raise():
    ins = (TRI(0, 0.5, 1),) * 3
    fis = Fis(((ins[0],),) * 3, (TRI(0, 0.5, 1),), (FuzzyRule((0, 0, 0), 0, 0.0),))
    with pytest.raises(NoRuleFired):
        fis.infer((0.5, 0.5, 0.5))


def test_inputs_outside_support_raise():
    fis = one_rule(TRI(0.4, 0.6, 0.8))
    with pytest.raises(NoRuleFired):
        fis.infer((0.9, 0.5, 0.8))


@given(st.floats(0.01, 1.0), st.floats(0.01, 1.0),
       st.tuples(st.floats(0.05, 0.35), st.floats(0.35, 0.65), st.floats(0.65, 0.95)))
def test_weight_change_keeps_single_rule_output(w1, w2, x):
    # the clip height moves, the centre of the clipped symmetric plateau does not
    cons = TRI(0.3, 0.5, 0.7)
    a = one_rule(cons, w1)
    b = one_rule(cons, w2)
    try:
        ya = a.infer(x)
    except NoRuleFired:
        with pytest.raises(NoRuleFired):
            b.infer(x)
        return
    assert b.infer(x) == pytest.approx(ya, abs=1e-12)


def test_weight_scales_clip_height():
    # asymmetric consequent: the plateau midpoint depends on weight * firing
    cons = TRI(0.1, 0.6, 0.7)
    x = (0.15, 0.45, 0.75)  # each antecedent at degree 0.75
    for w in (0.3, 0.9):
        h = 0.75 * w
        lo, hi = 0.1 + h * 0.5, 0.7 - h * 0.1
        assert one_rule(cons, w).infer(x) == pytest.approx((lo + hi) / 2, abs=1e-12)


class TestDefuzzifyMom:
    grid = np.linspace(0, 1, 1001)

    def test_unique_maximum(self):
        agg = np.minimum(np.clip(1 - np.abs(self.grid - 0.6) / 0.2, 0, None), 1.0)
        assert defuzzify_mom(agg, self.grid) == pytest.approx(0.6, abs=1e-12)

    def test_plateau(self):
        agg = np.where((self.grid >= 0.2 - 1e-12) & (self.grid <= 0.4 + 1e-12), 0.7, 0.1)
        assert defuzzify_mom(agg, self.grid) == pytest.approx(0.3, abs=1e-12)

    def test_two_spikes(self):
        agg = np.zeros_like(self.grid)
        agg[100] = agg[900] = 0.8
        assert defuzzify_mom(agg, self.grid) == pytest.approx(0.5, abs=1e-12)

    def test_all_zero_raises(self):
        with pytest.raises(NoRuleFired):
            defuzzify_mom(np.zeros(11))


def grid_fis(active_counts, n_mf=5):
    centers = np.linspace(0, 1, n_mf)
    inputs = []
    for n_active in active_counts:
        inputs.append(tuple(TRI(max(c - 0.25, 0), c, min(c + 0.25, 1), active=m < n_active)
                            for m, c in enumerate(centers)))
    rules = tuple(FuzzyRule(cell, 0, 1.0) for cell in itertools.product(range(n_mf), repeat=3))
    return Fis(tuple(inputs), (TRI(0, 0.5, 1),), rules)


def test_active_rule_count_full_grid():
    assert active_rule_count(grid_fis((5, 5, 5))) == 125


def test_active_rule_count_product():
    assert active_rule_count(grid_fis((3, 2, 2))) == 12


def test_active_rule_count_empty_input():
    assert active_rule_count(grid_fis((0, 5, 5))) == 0


@given(st.tuples(*[st.integers(0, 5)] * 3), st.integers(0, 2), st.integers(0, 4))
@settings(max_examples=50, deadline=None)
def test_deactivating_mf_never_increases_rule_count(counts, var, mf_idx):
    fis = grid_fis(counts)
    inputs = [list(v) for v in fis.input_mfs]
    mf = inputs[var][mf_idx]
    inputs[var][mf_idx] = MembershipFunction(mf.kind, mf.params, False)
    fewer = Fis(tuple(map(tuple, inputs)), fis.output_mfs, fis.rules)
    assert fewer.active_rule_count() <= fis.active_rule_count()


def test_inactive_mf_excludes_rules_from_inference():
    fis = grid_fis((5, 5, 5))
    off = grid_fis((4, 5, 5))
    # input 0 at 1.0 only touches the last MF, which `off` disabled
    assert np.isfinite(fis.infer((1.0, 0.5, 0.5)))
    with pytest.raises(NoRuleFired):
        off.infer((1.0, 0.5, 0.5))


def test_oracle_agreement_small_sample(rng):
    for _ in range(100):
        fis = random_free_fis(rng)
        x = rng.random(3)
        expected = brute_force_mamdani(fis, x)
        if expected is None:
            with pytest.raises(NoRuleFired):
                fis.infer(x)
            continue
        y = fis.infer(x)
        assert 0.0 <= y <= 1.0
        assert y == pytest.approx(expected, abs=1 / (2 * fis.defuzz_resolution))


def test_sampled_path_close_to_exact(rng):
    for _ in range(30):
        fis = random_free_fis(rng, p_active=1.0)
        x = rng.random(3)
        try:
            y = fis.infer(x)
        except NoRuleFired:
            continue
        assert fis.infer_sampled(x) == pytest.approx(y, abs=1.0 / (fis.defuzz_resolution - 1))


def test_json_round_trip_is_exact(rng):
    fis = random_free_fis(rng)
    ctrl = FuzzyController(fis, random_free_fis(rng), {"scheme": "test"})
    back = FuzzyController.from_json(ctrl.to_json())
    assert back == ctrl
    assert json.loads(back.to_json()) == json.loads(ctrl.to_json())


def test_rule_with_missing_mf_rejected():
    with pytest.raises(ValueError):
        Fis(((TRI(0, 0.5, 1),),) * 3, (TRI(0, 0.5, 1),), (FuzzyRule((0, 1, 0), 0, 1.0),))


def test_centers_must_follow_label_order():
    with pytest.raises(InvalidMembershipError):
        Fis(((TRI(0.4, 0.6, 0.8), TRI(0, 0.2, 0.4)),) * 3, (TRI(0, 0.5, 1),),
            (FuzzyRule((0, 0, 0), 0, 1.0),))

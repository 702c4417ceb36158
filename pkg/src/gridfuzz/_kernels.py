"""Compiled inner loops shared by the fuzzy engine and the microgrid simulator.

Everything here works on flat numpy arrays so numba can compile it in
nopython mode. The public modules wrap these with dataclasses.
"""

import math

import numpy as np
from numba import njit

TRIANGULAR = 0
LEFT_SHOULDER = 1
RIGHT_SHOULDER = 2

# action tags stored in the ledger
IDLE = 0
FORCED_SELL = 1
FORCED_BUY = 2
FORCED_CHARGE = 3
FUZZY_ALPHA = 4
FUZZY_BETA = 5


@njit(cache=True, nogil=True)
def mf_degree(kind, p, x):
    if kind == TRIANGULAR:
        a, b, c = p[0], p[1], p[2]
        if x < a or x > c:
            return 0.0
        if x == b:
            return 1.0
        if x < b:
            return (x - a) / (b - a)
        return (c - x) / (c - b)
    elif kind == LEFT_SHOULDER:
        p1, p2 = p[0], p[1]
        if x <= p1:
            return 1.0
        if x >= p2:
            return 0.0
        return (p2 - x) / (p2 - p1)
    else:
        p1, p2 = p[0], p[1]
        if x >= p2:
            return 1.0
        if x <= p1:
            return 0.0
        return (x - p1) / (p2 - p1)


@njit(cache=True, nogil=True)
def superlevel(kind, p, h):
    """Interval where the MF reaches at least ``h`` (0 < h <= 1)."""
    if kind == TRIANGULAR:
        a, b, c = p[0], p[1], p[2]
        lo = min(a + h * (b - a), b)
        hi = max(c - h * (c - b), b)
        return lo, hi
    elif kind == LEFT_SHOULDER:
        return 0.0, max(p[1] - h * (p[1] - p[0]), p[0])
    else:
        return min(p[0] + h * (p[1] - p[0]), p[1]), 1.0


@njit(cache=True, nogil=True)
def consequent_strengths(in_kind, in_params, in_active, n_out,
                         rule_ante, rule_cons, rule_w, x):
    """Per-output-MF clip height: max over rules of weight * min(antecedents)."""
    n_var, n_mf = in_kind.shape
    deg = np.zeros((n_var, n_mf))
    for v in range(n_var):
        for m in range(n_mf):
            if in_active[v, m]:
                deg[v, m] = mf_degree(in_kind[v, m], in_params[v, m], x[v])
    strength = np.zeros(n_out)
    for r in range(rule_ante.shape[0]):
        w = rule_w[r]
        if w <= 0.0:
            continue
        fire = 1.0
        live = True
        for v in range(n_var):
            m = rule_ante[r, v]
            if not in_active[v, m]:
                live = False
                break
            d = deg[v, m]
            if d < fire:
                fire = d
        if not live:
            continue
        fire *= w
        k = rule_cons[r]
        if fire > strength[k]:
            strength[k] = fire
    return strength


@njit(cache=True, nogil=True)
def mom_of_strengths(out_kind, out_params, strength):
    """Mean of maximum of max_k min(strength[k], mu_k) over [0, 1].

    Returns NaN when nothing fired. The maximizer set is a union of
    superlevel intervals; its mean is length-weighted, or the mean of the
    distinct points when every interval is degenerate.
    """
    n_out = strength.shape[0]
    h = 0.0
    for k in range(n_out):
        if strength[k] > h:
            h = strength[k]
    if h <= 0.0:
        return np.nan
    los = np.empty(n_out)
    his = np.empty(n_out)
    n = 0
    for k in range(n_out):
        if strength[k] == h:
            lo, hi = superlevel(out_kind[k], out_params[k], h)
            los[n] = lo
            his[n] = hi
            n += 1
    order = np.argsort(los[:n])
    total = 0.0
    moment = 0.0
    pts = 0.0
    n_pts = 0
    cur_lo = los[order[0]]
    cur_hi = his[order[0]]
    for j in range(1, n + 1):
        if j < n and los[order[j]] <= cur_hi:
            if his[order[j]] > cur_hi:
                cur_hi = his[order[j]]
            continue
        length = cur_hi - cur_lo
        total += length
        moment += length * 0.5 * (cur_lo + cur_hi)
        pts += 0.5 * (cur_lo + cur_hi)
        n_pts += 1
        if j < n:
            cur_lo = los[order[j]]
            cur_hi = his[order[j]]
    if total > 0.0:
        return moment / total
    return pts / n_pts


@njit(cache=True, nogil=True)
def fis_infer(in_kind, in_params, in_active, out_kind, out_params,
              rule_ante, rule_cons, rule_w, x):
    strength = consequent_strengths(in_kind, in_params, in_active,
                                    out_kind.shape[0], rule_ante, rule_cons,
                                    rule_w, x)
    return mom_of_strengths(out_kind, out_params, strength)


@njit(cache=True, nogil=True)
def norm01(v, lo, hi):
    if hi <= lo:
        return 0.5
    z = (v - lo) / (hi - lo)
    if z < 0.0:
        return 0.0
    if z > 1.0:
        return 1.0
    return z


@njit(cache=True, nogil=True)
def charge_efficiency(mode, eta_fixed, v_ocv, r_ch, power_kw):
    if mode == 0:
        return eta_fixed
    i_bat = power_kw * 1000.0 / v_ocv
    return v_ocv / (v_ocv + r_ch * i_bat)


@njit(cache=True, nogil=True)
def discharge_efficiency(mode, eta_fixed, v_ocv, r_dis, power_kw):
    if mode == 0:
        return eta_fixed
    i_bat = power_kw * 1000.0 / v_ocv
    return (v_ocv - r_dis * i_bat) / v_ocv


@njit(cache=True, nogil=True)
def charge(soc, offer, dt, cap, soc_max, p_lim, mode, eta_fixed, v_ocv, r_ch):
    """Returns (absorbed at terminals, new soc, efficiency used)."""
    if offer <= 0.0 or soc >= soc_max:
        return 0.0, soc, 1.0
    e = min(offer, p_lim * dt)
    eta = charge_efficiency(mode, eta_fixed, v_ocv, r_ch, e / dt)
    headroom = (soc_max - soc) * cap / eta
    if headroom < e:
        e = headroom
        eta = charge_efficiency(mode, eta_fixed, v_ocv, r_ch, e / dt)
        headroom = (soc_max - soc) * cap / eta
        if headroom < e:
            e = headroom
    new = soc + eta * e / cap
    if new > soc_max:
        new = soc_max
    return e, new, eta


@njit(cache=True, nogil=True)
def discharge(soc, request, dt, cap, soc_min, p_lim, mode, eta_fixed, v_ocv,
              r_dis):
    """Returns (delivered at terminals, new soc, efficiency used)."""
    if request <= 0.0 or soc <= soc_min:
        return 0.0, soc, 1.0
    e = min(request, p_lim * dt)
    eta = discharge_efficiency(mode, eta_fixed, v_ocv, r_dis, e / dt)
    avail = eta * (soc - soc_min) * cap
    if avail < e:
        e = avail
        eta = discharge_efficiency(mode, eta_fixed, v_ocv, r_dis, e / dt)
        avail = eta * (soc - soc_min) * cap
        if avail < e:
            e = avail
    new = soc - e / (eta * cap)
    if new < soc_min:
        new = soc_min
    return e, new, eta


@njit(cache=True, nogil=True)
def step_kernel(soc, prod, dem, c_buy, c_sell, dt, batt, alpha, beta, out):
    """Advance one sample.

    batt = [cap, soc_min, soc_max, p_lim, mode, eta_ch, eta_dis, v_ocv, r_ch, r_dis]
    out = [balance, soc, sold, bought, charged, discharged, revenue, expense,
           profit, tag, fis_output]  (filled in place)

    Returns the new soc. ``alpha`` and ``beta`` are only read on their own
    fuzzy route.
    """
    cap = batt[0]
    soc_min = batt[1]
    soc_max = batt[2]
    p_lim = batt[3]
    mode = int(batt[4])
    bal = prod - dem
    sold = 0.0
    bought = 0.0
    charged = 0.0
    discharged = 0.0
    new = soc
    fis_out = np.nan
    tag = route(bal, soc, soc_min, soc_max)
    if tag == FORCED_CHARGE:
        need = (soc_min - soc) * cap / charge_efficiency(
            mode, batt[5], batt[7], batt[8], (soc_min - soc) * cap / dt)
        charged, new, _ = charge(soc, need, dt, cap, soc_max, p_lim, mode,
                                 batt[5], batt[7], batt[8])
        if new > soc_min - 1e-12 and new < soc_min:
            new = soc_min
        surplus = bal * dt
        if surplus >= charged:
            sold = surplus - charged
        else:
            bought = charged - surplus
    elif tag == FORCED_SELL:
        sold = bal * dt
    elif tag == FORCED_BUY:
        bought = -bal * dt
    elif tag == FUZZY_ALPHA:
        a = alpha
        fis_out = a
        e = bal * dt
        offer = (1.0 - a) * e
        charged, new, _ = charge(soc, offer, dt, cap, soc_max, p_lim, mode,
                                 batt[5], batt[7], batt[8])
        sold = e - charged
    elif tag == FUZZY_BETA:
        b = beta
        fis_out = b
        e = -bal * dt
        req = (1.0 - b) * e
        discharged, new, _ = discharge(soc, req, dt, cap, soc_min, p_lim,
                                       mode, batt[6], batt[7], batt[9])
        bought = e - discharged
    revenue = c_sell * sold
    expense = c_buy * bought
    out[0] = bal
    out[1] = new
    out[2] = sold
    out[3] = bought
    out[4] = charged
    out[5] = discharged
    out[6] = revenue
    out[7] = expense
    out[8] = revenue - expense
    out[9] = tag
    out[10] = fis_out
    return new


@njit(cache=True, nogil=True)
def route(bal, soc, soc_min, soc_max):
    if soc < soc_min:
        return FORCED_CHARGE
    if bal > 0.0 and soc >= soc_max:
        return FORCED_SELL
    if bal < 0.0 and soc <= soc_min:
        return FORCED_BUY
    if bal == 0.0:
        return IDLE
    if bal > 0.0:
        return FUZZY_ALPHA
    return FUZZY_BETA


@njit(cache=True, nogil=True)
def simulate_kernel(prod, dem, c_buy, c_sell, dt, batt, soc0, ranges,
                    a_kind, a_params, a_active, a_okind, a_oparams,
                    a_ante, a_cons, a_w, a_ok,
                    b_kind, b_params, b_active, b_okind, b_oparams,
                    b_ante, b_cons, b_w, b_ok,
                    ledger):
    """Fold ``step_kernel`` over a scenario.

    ranges = [bal_lo, bal_hi, buy_lo, buy_hi, sell_lo, sell_hi]

    ``a_ok``/``b_ok`` False marks a degenerate FIS: its route falls back to
    the pure-grid action. When ``ledger`` has rows it receives one row per
    step; pass a (0, 11) array to skip recording. Returns total profit.
    """
    n = prod.shape[0]
    soc = soc0
    soc_min = batt[1]
    soc_max = batt[2]
    out = np.zeros(11)
    x = np.zeros(3)
    keep = ledger.shape[0] == n
    total = 0.0
    for t in range(n):
        bal = prod[t] - dem[t]
        tag = route(bal, soc, soc_min, soc_max)
        alpha = 1.0
        beta = 1.0
        if tag == FUZZY_ALPHA or tag == FUZZY_BETA:
            x[0] = norm01(bal, ranges[0], ranges[1])
            x[1] = norm01(soc, soc_min, soc_max)
            if tag == FUZZY_ALPHA:
                x[2] = norm01(c_sell[t], ranges[4], ranges[5])
                if a_ok:
                    v = fis_infer(a_kind, a_params, a_active, a_okind,
                                  a_oparams, a_ante, a_cons, a_w, x)
                    if not math.isnan(v):
                        alpha = v
            else:
                x[2] = norm01(c_buy[t], ranges[2], ranges[3])
                if b_ok:
                    v = fis_infer(b_kind, b_params, b_active, b_okind,
                                  b_oparams, b_ante, b_cons, b_w, x)
                    if not math.isnan(v):
                        beta = v
        soc = step_kernel(soc, prod[t], dem[t], c_buy[t], c_sell[t], dt, batt,
                          alpha, beta, out)
        total += out[8]
        if keep:
            for j in range(11):
                ledger[t, j] = out[j]
    return total

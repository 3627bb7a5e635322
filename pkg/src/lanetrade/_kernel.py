"""Compiled fast path of the simulation step.

Mirrors sim.python_step operation for operation (same keyed random streams,
same scan semantics, same game arithmetic specialized to the canonical
conflict matrices), so both engines produce bit-identical trajectories and
ledgers.  Leader/lag scans are bounded by a horizon beyond which a half-gap
cap can never bind, which leaves every decision unchanged.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .ledger import REC_WIDTH

FAR = 1 << 30

_U64 = np.uint64
_GAMMA = _U64(0x9E3779B97F4A7C15)
_C1 = _U64(0xBF58476D1CE4E5B9)
_C2 = _U64(0x94D049BB133111EB)
_S30 = _U64(30)
_S27 = _U64(27)
_S31 = _U64(31)
_S11 = _U64(11)
_INV53 = 2.0 ** -53

_TAG_SLOWDOWN = _U64(1)
_TAG_COIN = _U64(2)


@njit(cache=True, inline="always")
def _mix64(z):
    z = (z ^ (z >> _S30)) * _C1
    z = (z ^ (z >> _S27)) * _C2
    return z ^ (z >> _S31)


@njit(cache=True, inline="always")
def _u01(seed, a, b, tag):
    h = _mix64(seed + _GAMMA)
    h = _mix64(h + a + _GAMMA)
    h = _mix64(h + b + _GAMMA)
    h = _mix64(h + tag + _GAMMA)
    return (h >> _S11) * _INV53


@njit(cache=True)
def _hash_u64(seed, a, b, tag):
    h = _mix64(seed + _GAMMA)
    h = _mix64(h + a + _GAMMA)
    h = _mix64(h + b + _GAMMA)
    return _mix64(h + tag + _GAMMA)


@njit(cache=True, inline="always")
def _dist_ahead(occ, ln, cell, start, n_cells, ring, wrap_to_self, horizon):
    if start == 0 and occ[ln, cell] >= 0:
        return 0
    limit = n_cells - 1 if ring else n_cells - 1 - cell
    lim = min(limit, horizon)
    d = 1
    while d <= lim:
        c = cell + d
        if c >= n_cells:
            c -= n_cells
        if occ[ln, c] >= 0:
            return d
        d += 1
    if lim < limit:
        return FAR  # beyond the horizon no cap can bind
    return n_cells if (ring and wrap_to_self) else FAR


@njit(cache=True, inline="always")
def _dist_behind(occ, ln, cell, n_cells, ring, horizon):
    limit = n_cells - 1 if ring else cell
    lim = min(limit, horizon)
    d = 1
    while d <= lim:
        c = cell - d
        if c < 0:
            c += n_cells
        if occ[ln, c] >= 0:
            return d, occ[ln, c]
        d += 1
    return FAR, -1


@njit(cache=True, inline="always")
def _time_gain(v1_cells, v2_cells, ve, cells_to_ms, a_pos_ms, a_neg_ms, ta):
    v1 = v1_cells * cells_to_ms
    v2 = v2_cells * cells_to_ms
    a1 = a_neg_ms if v1 >= ve else a_pos_ms
    a2 = a_pos_ms if v2 <= ve else a_neg_ms
    dv1 = ve - v1
    dv2 = ve - v2
    gain = (v1 - v2) * ta + dv1 * dv1 / (-a1) + dv2 * dv2 / a2
    return gain / (2.0 * ve)


@njit(cache=True)
def _step_core(pos, lane, v, ids, klass, cvot_decl, cvot_true,
               n_cells, ring, v_max, p_sd, seed, step,
               ve3, cells_to_ms, a_pos_ms, a_neg_ms, ta, rec):
    n = pos.shape[0]
    occ = np.full((2, n_cells), -1, np.int64)
    for k in range(n):
        occ[lane[k], pos[k]] = k
    horizon = 2 * v_max + 2
    step_u = _U64(step)

    # processing order from the static occupancy: downstream-most first,
    # lane 0 before lane 1 at equal positions
    order = np.empty(n, np.int64)
    m = 0
    for c in range(n_cells - 1, -1, -1):
        for ln in range(2):
            k = occ[ln, c]
            if k >= 0:
                order[m] = k
                m += 1

    v_stay = np.empty(n, np.int64)
    v_change = np.empty(n, np.int64)
    for i in range(n):
        vi = v[i] + 1
        if vi > v_max:
            vi = v_max
        cell = pos[i]
        ln = lane[i]
        d_s = _dist_ahead(occ, ln, cell, 1, n_cells, ring, True, horizon)
        d_t = _dist_ahead(occ, 1 - ln, cell, 0, n_cells, ring, False, horizon)
        vs = min(vi, d_s // 2)
        vc = min(vi, min(vs + 1, d_t // 2))
        if _u01(seed, _U64(ids[i]), step_u, _TAG_SLOWDOWN) < p_sd:
            if vs > 0:
                vs -= 1
            if vc > 0:
                vc -= 1
        v_stay[i] = vs
        v_change[i] = vc

    final_v = v_stay.copy()
    committed = np.zeros(n, np.bool_)
    n_rec = 0
    free_changes = 0

    for oi in range(n):
        i = order[oi]
        if committed[i]:
            continue
        vs = v_stay[i]
        vc = v_change[i]
        if vc <= vs:
            continue
        cell = pos[i]
        target = 1 - lane[i]
        d_t = _dist_ahead(occ, target, cell, 0, n_cells, ring, False, horizon)
        cap_t = d_t // 2
        if cap_t < vc:
            vc = cap_t
        if vc <= vs:
            continue

        d_ab, j = _dist_behind(occ, target, cell, n_cells, ring, horizon)
        cap_b = d_ab // 2
        if j >= 0:
            speed_b = final_v[j] if committed[j] else v_stay[j]
        else:
            speed_b = 0
        if j < 0 or speed_b <= cap_b:
            occ[lane[i], cell] = -1
            lane[i] = target
            occ[target, cell] = i
            final_v[i] = vc
            committed[i] = True
            free_changes += 1
            continue
        if committed[j]:
            continue

        td_a = _time_gain(vc, vs, ve3[klass[i]], cells_to_ms,
                          a_pos_ms, a_neg_ms, ta)
        v1b = v_stay[j]
        v2b = v1b if cap_b >= v1b else cap_b
        td_b = _time_gain(v1b, v2b, ve3[klass[j]], cells_to_ms,
                          a_pos_ms, a_neg_ms, ta)
        gain_a = cvot_decl[i] * td_a
        gain_b = cvot_decl[j] * td_b
        both_tv = klass[i] != 2 and klass[j] != 2

        sigma = 0.0
        if both_tv:
            # side-payment game on the canonical matrices: the threat value
            # is identically zero, the joint action maximizes the total gain
            # (status quo, then "B holds", then "A changes" on ties)
            omega = 0.0
            ai = 2
            aj = 2
            a_cell = 0.0
            if gain_b > omega:
                omega = gain_b
                ai = 2
                aj = 1
                a_cell = 0.0
            if gain_a > omega:
                omega = gain_a
                ai = 1
                aj = 2
                a_cell = gain_a
            sigma = a_cell - omega / 2.0
            kind = 0.0
        else:
            if gain_a == 0.0 and gain_b == 0.0:
                ai = 2
                aj = 2
            elif _u01(seed, _U64(ids[i]), step_u, _TAG_COIN) < 0.5:
                ai = 1
                aj = 2
            else:
                ai = 2
                aj = 1
            kind = 1.0

        if ai == 1:
            occ[lane[i], cell] = -1
            lane[i] = target
            occ[target, cell] = i
            final_v[i] = vc
            final_v[j] = v2b
        else:
            final_v[i] = vs
            final_v[j] = v1b
        committed[i] = True
        committed[j] = True

        rec[n_rec, 0] = step
        rec[n_rec, 1] = ids[i]
        rec[n_rec, 2] = ids[j]
        rec[n_rec, 3] = kind
        rec[n_rec, 4] = ai
        rec[n_rec, 5] = aj
        rec[n_rec, 6] = sigma
        rec[n_rec, 7] = td_a
        rec[n_rec, 8] = td_b
        rec[n_rec, 9] = td_a if ai == 1 else 0.0
        rec[n_rec, 10] = td_b if (ai == 2 and aj == 1) else 0.0
        rec[n_rec, 11] = cvot_decl[i]
        rec[n_rec, 12] = cvot_decl[j]
        rec[n_rec, 13] = cvot_true[i]
        rec[n_rec, 14] = cvot_true[j]
        n_rec += 1

    for i in range(n):
        v[i] = final_v[i]
        if ring:
            pos[i] = (pos[i] + final_v[i]) % n_cells
        else:
            pos[i] = pos[i] + final_v[i]

    return n_rec, free_changes


def kernel_step(lat, cfg, ve_by_class, step, buf=None):
    """One compiled update; mutates the lattice arrays in place.

    Returns (records_chunk, n_free_changes) exactly as sim.python_step.
    """
    if buf is None or buf.shape[0] < max(lat.n, 1):
        buf = np.empty((max(lat.n, 1), REC_WIDTH))
    n_rec, free = _step_core(
        lat.pos, lat.lane, lat.v, lat.ids, lat.klass,
        lat.cvot_decl, lat.cvot_true,
        np.int64(lat.n_cells), cfg.ring, np.int64(cfg.v_max),
        np.float64(cfg.p_sd), _U64(cfg.seed & ((1 << 64) - 1)), np.int64(step),
        np.ascontiguousarray(ve_by_class, dtype=np.float64),
        np.float64(cfg.cells_to_ms), np.float64(cfg.a_pos_ms),
        np.float64(cfg.a_neg_ms), np.float64(cfg.ta),
        buf,
    )
    lat.step_index = step + 1
    return buf[:n_rec].copy(), free

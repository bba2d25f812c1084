"""Boundary-matrix column reduction over GF(2), numba-compiled.

Columns are kept as ascending-sorted int32 index arrays; XOR is a
two-pointer merge. The driver runs dimensions top-down with the clearing
(twist) optimization, so rows killed at dimension d are never reduced at
dimension d-1. V-columns (needed only for infinite-bar representatives)
are tracked solely at the dimensions where clearing has already removed
the bulk of the columns, which keeps their cost negligible.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def _merge_xor(a, alen, pool, pstart, plen, out):
    """Symmetric difference of sorted a[:alen] and pool[pstart:pstart+plen] into out."""
    i = 0
    j = pstart
    jend = pstart + plen
    k = 0
    while i < alen and j < jend:
        x = a[i]
        y = pool[j]
        if x < y:
            out[k] = x
            i += 1
            k += 1
        elif x > y:
            out[k] = y
            j += 1
            k += 1
        else:
            i += 1
            j += 1
    while i < alen:
        out[k] = a[i]
        i += 1
        k += 1
    while j < jend:
        out[k] = pool[j]
        j += 1
        k += 1
    return k


@njit(cache=True)
def reduce_dimension(bnd, cleared, n_rows, track_v):
    """Reduce the dimension-d boundary columns in filtration order.

    bnd: (m, d+1) int32, per-column facet row positions, sorted ascending.
    cleared: uint8[m], columns already known to reduce to zero (skipped).
    n_rows: number of (d-1)-simplices.
    track_v: also accumulate V columns (chains) for this dimension.

    Returns (pair_row, is_zero, pivot_owner,
             r_start, r_len, r_pool, v_start, v_len, v_pool).
    """
    m, width = bnd.shape
    pivot_owner = np.full(n_rows, -1, np.int64)
    pair_row = np.full(m, -1, np.int64)
    is_zero = np.zeros(m, np.uint8)

    r_start = np.full(m, -1, np.int64)
    r_len = np.zeros(m, np.int64)
    r_pool = np.empty(4096, np.int32)
    r_ptr = 0

    v_cap = m if track_v else 1
    v_start = np.full(v_cap, -1, np.int64)
    v_len = np.zeros(v_cap, np.int64)
    v_pool = np.empty(4096 if track_v else 1, np.int32)
    v_ptr = 0

    cur = np.empty(max(256, width), np.int32)
    tmp = np.empty(max(256, width), np.int32)
    vcur = np.empty(256, np.int32)
    vtmp = np.empty(256, np.int32)

    for j in range(m):
        if cleared[j]:
            continue
        clen = width
        for t in range(width):
            cur[t] = bnd[j, t]
        vlen = 0
        if track_v:
            vcur[0] = j
            vlen = 1
        while True:
            if clen == 0:
                is_zero[j] = 1
                if track_v:
                    while v_pool.shape[0] < v_ptr + vlen:
                        newpool = np.empty(v_pool.shape[0] * 2, np.int32)
                        newpool[:v_ptr] = v_pool[:v_ptr]
                        v_pool = newpool
                    v_start[j] = v_ptr
                    v_len[j] = vlen
                    for t in range(vlen):
                        v_pool[v_ptr + t] = vcur[t]
                    v_ptr += vlen
                break
            low = cur[clen - 1]
            owner = pivot_owner[low]
            if owner == -1:
                pivot_owner[low] = j
                pair_row[j] = low
                while r_pool.shape[0] < r_ptr + clen:
                    newpool = np.empty(r_pool.shape[0] * 2, np.int32)
                    newpool[:r_ptr] = r_pool[:r_ptr]
                    r_pool = newpool
                r_start[j] = r_ptr
                r_len[j] = clen
                for t in range(clen):
                    r_pool[r_ptr + t] = cur[t]
                r_ptr += clen
                if track_v:
                    while v_pool.shape[0] < v_ptr + vlen:
                        newpool = np.empty(v_pool.shape[0] * 2, np.int32)
                        newpool[:v_ptr] = v_pool[:v_ptr]
                        v_pool = newpool
                    v_start[j] = v_ptr
                    v_len[j] = vlen
                    for t in range(vlen):
                        v_pool[v_ptr + t] = vcur[t]
                    v_ptr += vlen
                break
            need = clen + r_len[owner]
            while tmp.shape[0] < need:
                tmp = np.empty(tmp.shape[0] * 2, np.int32)
            clen = _merge_xor(cur, clen, r_pool, r_start[owner], r_len[owner], tmp)
            cur, tmp = tmp, cur
            if cur.shape[0] < clen + 8:
                newcur = np.empty(max(cur.shape[0] * 2, clen + 8), np.int32)
                newcur[:clen] = cur[:clen]
                cur = newcur
            if track_v:
                vneed = vlen + v_len[owner]
                while vtmp.shape[0] < vneed:
                    vtmp = np.empty(vtmp.shape[0] * 2, np.int32)
                vlen = _merge_xor(vcur, vlen, v_pool, v_start[owner], v_len[owner], vtmp)
                vcur, vtmp = vtmp, vcur

    return (pair_row, is_zero, pivot_owner,
            r_start, r_len, r_pool[:r_ptr],
            v_start, v_len, v_pool[:v_ptr])

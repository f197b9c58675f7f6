"""
Compiled forward sweep shared by the FFAPINV and ILUFF drivers.

One routine covers both because they differ only in where dropping happens
and in what is kept at the end:

* FFAPINV (``ilu=False``): a coefficient is discarded when |c| < tau, the
  new row w_j / column z_j is purged of entries |x| < tau once complete.
* ILUFF (``ilu=True``): a coefficient is used (and stored in L or U) only if
  |c| > tau, and z_j / w_j are purged after every single update.

All growable storage uses capacity doubling.  Column traversal of A follows
the linked lists of a ColumnCursorIndex; finished rows of W (columns of Z)
are threaded into per-column (per-row) linked lists the same way so that
w_i . A[:, j] and A[j, :] . z_i are only formed for the i that can be
nonzero.
"""

import numpy as np
from numba import njit

OK = 0
NONFINITE = 1
NOT_POSITIVE_DEFINITE = 2


@njit(cache=True)
def _grow(arr, need):
    if need <= arr.shape[0]:
        return arr
    out = np.empty(max(need, 2 * arr.shape[0]), arr.dtype)
    out[: arr.shape[0]] = arr
    return out


@njit(cache=True)
def _gather_coeffs(stamp, a_val, starts, nexts, owner, limit_k,
                   v_head, v_link, v_owner, v_val, d,
                   acc, acc_mark, cand):
    """
    coeff_i = d_i * (x_i . a) for every i < j that can be nonzero, where a
    is the sparse vector given by the linked list ``starts`` (column j of A
    or row j of A) and x_i are the finished unit-triangular vectors whose
    off-diagonal entries are chained per position k by ``v_head/v_link``.
    Returns the number of candidates written to ``cand`` (sorted).
    """
    nc = 0
    e = starts
    while e != -1:
        k = owner[e]
        if k < limit_k:
            av = a_val[e]
            if acc_mark[k] != stamp:
                acc_mark[k] = stamp
                acc[k] = 0.0
                cand[nc] = k
                nc += 1
            acc[k] += av
            f = v_head[k]
            while f != -1:
                i = v_owner[f]
                if acc_mark[i] != stamp:
                    acc_mark[i] = stamp
                    acc[i] = 0.0
                    cand[nc] = i
                    nc += 1
                acc[i] += v_val[f] * av
                f = v_link[f]
        e = nexts[e]
    cand[:nc] = np.sort(cand[:nc])
    for t in range(nc):
        i = cand[t]
        acc[i] = d[i] * acc[i]
    return nc


@njit(cache=True)
def forward_sweep(n, a_ptr, a_idx, a_val, c_first, c_next, c_row,
                  tau, ilu, pd, eps, safe):
    """
    Returns
        status, bad_index, breakdowns, d,
        W rows  (w_ptr, w_idx, w_val)     strictly lower part, row-wise
        Z cols  (z_ptr, z_idx, z_val)     strictly upper part, column-wise
        L rows  (l_ptr, l_idx, l_val)     only filled when ilu
        U cols  (u_ptr, u_idx, u_val)     only filled when ilu
    """
    cap = max(16, a_idx.shape[0])
    w_ptr = np.zeros(n + 1, np.int64)
    w_idx = np.empty(cap, np.int64)
    w_val = np.empty(cap, np.float64)
    w_owner = np.empty(cap, np.int64)
    w_link = np.empty(cap, np.int64)
    w_head = np.full(n, -1, np.int64)

    z_ptr = np.zeros(n + 1, np.int64)
    z_idx = np.empty(cap, np.int64)
    z_val = np.empty(cap, np.float64)
    z_owner = np.empty(cap, np.int64)
    z_link = np.empty(cap, np.int64)
    z_head = np.full(n, -1, np.int64)

    ccap = cap if ilu else 1
    l_ptr = np.zeros(n + 1, np.int64)
    l_idx = np.empty(ccap, np.int64)
    l_val = np.empty(ccap, np.float64)
    u_ptr = np.zeros(n + 1, np.int64)
    u_idx = np.empty(ccap, np.int64)
    u_val = np.empty(ccap, np.float64)

    d = np.zeros(n, np.float64)
    acc = np.zeros(n, np.float64)
    acc_mark = np.full(n, -1, np.int64)
    cand = np.empty(n, np.int64)

    zw = np.zeros(n, np.float64)
    z_mark = np.full(n, -1, np.int64)
    z_list = np.empty(n, np.int64)
    ww = np.zeros(n, np.float64)
    w_mark = np.full(n, -1, np.int64)
    w_list = np.empty(n, np.int64)

    # row-wise linked list over A's entries, used to walk row j like a column
    a_next_in_row = np.empty(a_idx.shape[0], np.int64)
    a_col = a_idx
    for r in range(n):
        for p in range(a_ptr[r], a_ptr[r + 1]):
            a_next_in_row[p] = p + 1 if p + 1 < a_ptr[r + 1] else -1

    breakdowns = 0
    for j in range(n):
        # ---- z_j = e_j - sum_i alpha_i z_i,  alpha_i = d_i w_i . A[:, j]
        nc = _gather_coeffs(2 * j, a_val, c_first[j], c_next, c_row, j,
                            w_head, w_link, w_owner, w_val, d,
                            acc, acc_mark, cand)
        nz = 0
        u_start = u_ptr[j]
        nu = 0
        for t in range(nc):
            i = cand[t]
            coef = acc[i]
            if not np.isfinite(coef):
                return NONFINITE, j, breakdowns, d, w_ptr, w_idx, w_val, z_ptr, z_idx, z_val, l_ptr, l_idx, l_val, u_ptr, u_idx, u_val
            if coef == 0.0:
                continue
            if ilu:
                if abs(coef) <= tau:
                    continue
                pos = u_start + nu
                u_idx = _grow(u_idx, pos + 1)
                u_val = _grow(u_val, pos + 1)
                u_idx[pos] = i
                u_val[pos] = coef
                nu += 1
            elif abs(coef) < tau:
                continue
            # axpy with the unit diagonal of z_i ...
            if z_mark[i] != j:
                z_mark[i] = j
                zw[i] = 0.0
                z_list[nz] = i
                nz += 1
            zw[i] -= coef
            # ... and its stored strictly upper entries
            for p in range(z_ptr[i], z_ptr[i + 1]):
                r = z_idx[p]
                if z_mark[r] != j:
                    z_mark[r] = j
                    zw[r] = 0.0
                    z_list[nz] = r
                    nz += 1
                zw[r] -= coef * z_val[p]
            if ilu:
                if abs(zw[i]) < tau:
                    zw[i] = 0.0
                for p in range(z_ptr[i], z_ptr[i + 1]):
                    r = z_idx[p]
                    if abs(zw[r]) < tau:
                        zw[r] = 0.0
        u_ptr[j + 1] = u_start + nu
        if not ilu:
            for t in range(nz):
                if abs(zw[z_list[t]]) < tau:
                    zw[z_list[t]] = 0.0

        # ---- w_j = e_j - sum_i beta_i w_i,  beta_i = d_i A[j, :] . z_i
        row_start = a_ptr[j] if a_ptr[j] < a_ptr[j + 1] else -1
        nc = _gather_coeffs(2 * j + 1, a_val, row_start, a_next_in_row, a_col, j,
                            z_head, z_link, z_owner, z_val, d,
                            acc, acc_mark, cand)
        nw = 0
        l_start = l_ptr[j]
        nl = 0
        for t in range(nc):
            i = cand[t]
            coef = acc[i]
            if not np.isfinite(coef):
                return NONFINITE, j, breakdowns, d, w_ptr, w_idx, w_val, z_ptr, z_idx, z_val, l_ptr, l_idx, l_val, u_ptr, u_idx, u_val
            if coef == 0.0:
                continue
            if ilu:
                if abs(coef) <= tau:
                    continue
                pos = l_start + nl
                l_idx = _grow(l_idx, pos + 1)
                l_val = _grow(l_val, pos + 1)
                l_idx[pos] = i
                l_val[pos] = coef
                nl += 1
            elif abs(coef) < tau:
                continue
            if w_mark[i] != j:
                w_mark[i] = j
                ww[i] = 0.0
                w_list[nw] = i
                nw += 1
            ww[i] -= coef
            for p in range(w_ptr[i], w_ptr[i + 1]):
                k = w_idx[p]
                if w_mark[k] != j:
                    w_mark[k] = j
                    ww[k] = 0.0
                    w_list[nw] = k
                    nw += 1
                ww[k] -= coef * w_val[p]
            if ilu:
                if abs(ww[i]) < tau:
                    ww[i] = 0.0
                for p in range(w_ptr[i], w_ptr[i + 1]):
                    k = w_idx[p]
                    if abs(ww[k]) < tau:
                        ww[k] = 0.0
        l_ptr[j + 1] = l_start + nl
        if not ilu:
            for t in range(nw):
                if abs(ww[w_list[t]]) < tau:
                    ww[w_list[t]] = 0.0

        # ---- pivot
        ajj = 0.0
        s = 0.0
        if pd:
            z_mark[j] = j
            zw[j] = 1.0
            z_list[nz] = j
            for t in range(nz + 1):
                r = z_list[t]
                zr = zw[r]
                if zr == 0.0:
                    continue
                for p in range(a_ptr[r], a_ptr[r + 1]):
                    c = a_idx[p]
                    if z_mark[c] == j:
                        s += zr * a_val[p] * zw[c]
            for p in range(a_ptr[j], a_ptr[j + 1]):
                if a_idx[p] == j:
                    ajj = a_val[p]
        else:
            e = c_first[j]
            while e != -1:
                k = c_row[e]
                if k == j:
                    ajj = a_val[e]
                    s += ajj
                elif k < j and w_mark[k] == j:
                    s += ww[k] * a_val[e]
                e = c_next[e]
        if not np.isfinite(s):
            return NONFINITE, j, breakdowns, d, w_ptr, w_idx, w_val, z_ptr, z_idx, z_val, l_ptr, l_idx, l_val, u_ptr, u_idx, u_val
        if pd and s <= 0.0:
            return NOT_POSITIVE_DEFINITE, j, breakdowns, d, w_ptr, w_idx, w_val, z_ptr, z_idx, z_val, l_ptr, l_idx, l_val, u_ptr, u_idx, u_val
        if abs(s) < eps:
            breakdowns += 1
            s = -safe if ajj < 0.0 else safe
        d[j] = 1.0 / s

        # ---- freeze z_j (column j of Z, rows < j) and thread it into row chains
        cnt = 0
        for t in range(nz):
            r = z_list[t]
            if r != j and zw[r] != 0.0:
                cand[cnt] = r
                cnt += 1
        rows_sorted = np.sort(cand[:cnt])
        base = z_ptr[j]
        z_idx = _grow(z_idx, base + cnt)
        z_val = _grow(z_val, base + cnt)
        z_owner = _grow(z_owner, base + cnt)
        z_link = _grow(z_link, base + cnt)
        for t in range(cnt):
            r = rows_sorted[t]
            pos = base + t
            z_idx[pos] = r
            z_val[pos] = zw[r]
            z_owner[pos] = j
            z_link[pos] = z_head[r]
            z_head[r] = pos
        z_ptr[j + 1] = base + cnt

        # ---- freeze w_j (row j of W, columns < j) and thread it into column chains
        cnt = 0
        for t in range(nw):
            k = w_list[t]
            if ww[k] != 0.0:
                cand[cnt] = k
                cnt += 1
        cols_sorted = np.sort(cand[:cnt])
        base = w_ptr[j]
        w_idx = _grow(w_idx, base + cnt)
        w_val = _grow(w_val, base + cnt)
        w_owner = _grow(w_owner, base + cnt)
        w_link = _grow(w_link, base + cnt)
        for t in range(cnt):
            k = cols_sorted[t]
            pos = base + t
            w_idx[pos] = k
            w_val[pos] = ww[k]
            w_owner[pos] = j
            w_link[pos] = w_head[k]
            w_head[k] = pos
        w_ptr[j + 1] = base + cnt

    return OK, -1, breakdowns, d, w_ptr, w_idx, w_val, z_ptr, z_idx, z_val, l_ptr, l_idx, l_val, u_ptr, u_idx, u_val

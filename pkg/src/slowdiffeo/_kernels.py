"""Compiled grid kernels for Weyl-sum extremal scans.

The scan evaluates ``W(n, .)`` and ``W'(n, .)`` on the uniform grid
``{j/G}`` from per-harmonic complex coefficients and, for the growth
sequence, maximises ``A(u) |W'| + |grad A(u)|_1 |W|`` over a u-grid that has
been reduced to its upper-right convex hull.
"""

from __future__ import annotations

import numba as nb
import numpy as np


@nb.njit(cache=True, nogil=True)
def _support(P, Q, hull_a, hull_g, thresholds):
    # index of the hull vertex maximising hull_a*P + hull_g*Q (P, Q >= 0)
    s = P + Q
    if s <= 0.0:
        return 0.0, 0
    t = Q / s
    lo = 0
    hi = thresholds.shape[0]
    while lo < hi:
        mid = (lo + hi) // 2
        if thresholds[mid] < t:
            lo = mid + 1
        else:
            hi = mid
    return hull_a[lo] * P + hull_g[lo] * Q, lo


@nb.njit(cache=True, nogil=True)
def scan_rows(ms, cre, cim, c0n, cos_t, sin_t, hull_a, hull_g, thresholds,
              best, best_j, best_v, max_w, max_wp, arg_wp):
    """Fill per-row extremal statistics.

    Row ``r`` has harmonic coefficients ``cre[r] + i cim[r]`` such that
    ``W(x_j) = c0n[r] + Re sum_h c_h exp(2 pi i m_h x_j)``.  Ties resolve to
    the lowest grid index.
    """
    G = cos_t.shape[0]
    H = ms.shape[0]
    two_pi = 2.0 * np.pi
    idx = np.empty(H, dtype=np.int64)
    step = np.empty(H, dtype=np.int64)
    for h in range(H):
        step[h] = ms[h] % G
    for r in range(cre.shape[0]):
        for h in range(H):
            idx[h] = 0
        b_val = -1.0
        b_j = 0
        b_v = 0
        mw = -1.0
        mwp = -1.0
        a_wp = 0
        for j in range(G):
            w = c0n[r]
            wp = 0.0
            for h in range(H):
                k = idx[h]
                c = cos_t[k]
                s = sin_t[k]
                re = cre[r, h] * c - cim[r, h] * s
                im = cre[r, h] * s + cim[r, h] * c
                w += re
                wp -= two_pi * ms[h] * im
                k += step[h]
                if k >= G:
                    k -= G
                idx[h] = k
            aw = abs(w)
            awp = abs(wp)
            if aw > mw:
                mw = aw
            if awp > mwp:
                mwp = awp
                a_wp = j
            val, v = _support(awp, aw, hull_a, hull_g, thresholds)
            if val > b_val:
                b_val = val
                b_j = j
                b_v = v
        best[r] = b_val
        best_j[r] = b_j
        best_v[r] = b_v
        max_w[r] = mw
        max_wp[r] = mwp
        arg_wp[r] = a_wp


@nb.njit(cache=True, nogil=True)
def signed_grid_values(ms, cre, cim, c0, cos_t, sin_t, out_w, out_wp):
    """``W`` and ``W'`` on the whole grid for a single coefficient row."""
    G = cos_t.shape[0]
    H = ms.shape[0]
    two_pi = 2.0 * np.pi
    for j in range(G):
        w = c0
        wp = 0.0
        for h in range(H):
            k = (ms[h] * j) % G
            re = cre[h] * cos_t[k] - cim[h] * sin_t[k]
            im = cre[h] * sin_t[k] + cim[h] * cos_t[k]
            w += re
            wp -= two_pi * ms[h] * im
        out_w[j] = w
        out_wp[j] = wp


def unit_table(G: int) -> tuple[np.ndarray, np.ndarray]:
    k = np.arange(G, dtype=float) / G
    ang = 2.0 * np.pi * k
    return np.cos(ang), np.sin(ang)

"""Compiled sup-inf / inf-sup kernels for the limit-process simulation.

Each kernel walks the full (u, v) grid once per realization, keeping the
running minimum over v for every u (sup-inf) and the running maximum over u
for every v (inf-sup).  Field value at a grid point is
``scale * (noise(u, v) * inv_denom(u, v) + drift(u, v))``.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def supinf_infsup_1d(A, B, inv, drift, scale, out):
    """``A``: (n, Ku) u-part of the noise, ``B``: (n, Kv) v-part; writes (n, 2)."""
    n, Ku = A.shape
    Kv = B.shape[1]
    colmax = np.empty(Kv)
    for r in range(n):
        for c in range(Kv):
            colmax[c] = -np.inf
        best = -np.inf
        for a in range(Ku):
            rowmin = np.inf
            ua = A[r, a]
            for c in range(Kv):
                x = scale * ((ua + B[r, c]) * inv[a, c] + drift[a, c])
                if x < rowmin:
                    rowmin = x
                if x > colmax[c]:
                    colmax[c] = x
            if rowmin > best:
                best = rowmin
        worst = np.inf
        for c in range(Kv):
            if colmax[c] < worst:
                worst = colmax[c]
        out[r, 0] = best
        out[r, 1] = worst


@njit(cache=True)
def supinf_infsup_2d(Q1, Q2, Q3, Q4, inv, drift, scale, out):
    """Quadrant prefix sums (already scaled), indexed [v1,v2], [u1,v2], [u1,u2], [v1,u2]."""
    n = Q1.shape[0]
    Ku1, Ku2, Kv1, Kv2 = inv.shape
    colmax = np.empty((Kv1, Kv2))
    for r in range(n):
        for c in range(Kv1):
            for e in range(Kv2):
                colmax[c, e] = -np.inf
        best = -np.inf
        for a in range(Ku1):
            for b in range(Ku2):
                s3 = Q3[r, a, b]
                rowmin = np.inf
                for c in range(Kv1):
                    s4 = Q4[r, c, b]
                    for e in range(Kv2):
                        x = scale * ((Q1[r, c, e] + Q2[r, a, e] + s3 + s4) * inv[a, b, c, e]
                                     + drift[a, b, c, e])
                        if x < rowmin:
                            rowmin = x
                        if x > colmax[c, e]:
                            colmax[c, e] = x
                if rowmin > best:
                    best = rowmin
        worst = np.inf
        for c in range(Kv1):
            for e in range(Kv2):
                if colmax[c, e] < worst:
                    worst = colmax[c, e]
        out[r, 0] = best
        out[r, 1] = worst


@njit(cache=True)
def block_maxmin_2d(Pc, Ps, j01, j02, colmax):
    """Max over lower corners of the min block mean over upper corners.

    ``Pc``/``Ps`` are padded prefix tables of counts and sums.  Lower corner
    values run over ``0 .. j0-1`` and upper over ``j0 .. M``; empty blocks are
    skipped.  ``colmax`` (upper-corner shaped) receives the max over lower
    corners.  Returns the best value and its lexicographically first corner.
    """
    M1 = Pc.shape[0] - 1
    M2 = Pc.shape[1] - 1
    for b1 in range(M1 - j01 + 1):
        for b2 in range(M2 - j02 + 1):
            colmax[b1, b2] = -np.inf
    best = -np.inf
    best1 = -1
    best2 = -1
    for a1 in range(j01):
        for a2 in range(j02):
            rowmin = np.inf
            for b1 in range(j01, M1 + 1):
                for b2 in range(j02, M2 + 1):
                    c = Pc[b1, b2] - Pc[a1, b2] - Pc[b1, a2] + Pc[a1, a2]
                    if c > 0:
                        s = Ps[b1, b2] - Ps[a1, b2] - Ps[b1, a2] + Ps[a1, a2]
                        m = s / c
                        if m < rowmin:
                            rowmin = m
                        if m > colmax[b1 - j01, b2 - j02]:
                            colmax[b1 - j01, b2 - j02] = m
            if rowmin < np.inf and rowmin > best:
                best = rowmin
                best1 = a1
                best2 = a2
    return best, best1, best2

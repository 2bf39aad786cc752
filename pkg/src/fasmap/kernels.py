"""Hot numeric kernels with a numba fast path and a pure-numpy fallback.

Set ``FASMAP_NO_NUMBA=1`` in the environment to force the numpy fallback
(useful on platforms without a working numba, and for benchmarking; see
``benchmarks/bench_kernels.py``).
"""
from __future__ import annotations

import os

import numpy as np

USE_NUMBA = os.environ.get("FASMAP_NO_NUMBA", "") not in ("1", "true", "yes")
if USE_NUMBA:
    try:
        from numba import njit, prange
    except ImportError:  # pragma: no cover
        USE_NUMBA = False


# ---------------------------------------------------------------------------
# segment vs axis-aligned-rectangle visibility (slab clipping)

def los_flags_numpy(bs_x, bs_y, px, py, rects):
    """LoS flag per query point: 1 iff the BS-to-point segment misses every
    closed rectangle. ``rects`` has rows (xmin, ymin, xmax, ymax); tangency
    counts as blocked."""
    px = np.asarray(px, dtype=np.float64)
    py = np.asarray(py, dtype=np.float64)
    blocked = np.zeros(px.shape, dtype=bool)
    dx = px - bs_x
    dy = py - bs_y
    for xmin, ymin, xmax, ymax in rects:
        tmin = np.zeros_like(px)
        tmax = np.ones_like(px)
        hit = np.ones(px.shape, dtype=bool)
        for d, b, lo, hi in ((dx, bs_x, xmin, xmax), (dy, bs_y, ymin, ymax)):
            para = d == 0.0
            hit &= ~para | ((b >= lo) & (b <= hi))
            with np.errstate(divide="ignore", invalid="ignore"):
                t1 = (lo - b) / d
                t2 = (hi - b) / d
            tlo = np.minimum(t1, t2)
            thi = np.maximum(t1, t2)
            tmin = np.where(para, tmin, np.maximum(tmin, tlo))
            tmax = np.where(para, tmax, np.minimum(tmax, thi))
        blocked |= hit & (tmin <= tmax)
    return (~blocked).astype(np.uint8)


# ---------------------------------------------------------------------------
# inverse-distance-weighted K-nearest interpolation for one map slice

def idw_numpy(tx, ty, ox, oy, values, k, power):
    """IDW estimate at targets from observations; k nearest, 1/d**power
    weights. Zero-distance targets short-circuit to the coincident value."""
    tx = np.asarray(tx, dtype=np.float64)
    d2 = (tx[:, None] - ox[None, :]) ** 2 + (np.asarray(ty)[:, None] - oy[None, :]) ** 2
    k = min(int(k), d2.shape[1])
    idx = np.argpartition(d2, k - 1, axis=1)[:, :k]
    dk = np.sqrt(np.take_along_axis(d2, idx, axis=1))
    vk = values[idx]
    out = np.empty(len(tx), dtype=np.float64)
    exact = dk.min(axis=1) == 0.0
    if exact.any():
        j = dk[exact].argmin(axis=1)
        out[exact] = vk[exact, j]
    rest = ~exact
    w = 1.0 / dk[rest] ** power
    out[rest] = (w * vk[rest]).sum(axis=1) / w.sum(axis=1)
    return out


# ---------------------------------------------------------------------------
# batched per-cell solve: x[c] = inv_stack[group[c]] @ rhs[c]

def grouped_solve_numpy(inv_stack, group, rhs):
    return np.einsum("cij,cj->ci", inv_stack[group], rhs)


if USE_NUMBA:

    @njit(cache=True, parallel=True)
    def _los_flags_numba(bs_x, bs_y, px, py, rects):  # pragma: no cover - jit
        n = px.shape[0]
        out = np.empty(n, dtype=np.uint8)
        nb = rects.shape[0]
        for c in prange(n):
            dx = px[c] - bs_x
            dy = py[c] - bs_y
            flag = np.uint8(1)
            for b in range(nb):
                tmin = 0.0
                tmax = 1.0
                ok = True
                for ax in range(2):
                    if ax == 0:
                        d, o, lo, hi = dx, bs_x, rects[b, 0], rects[b, 2]
                    else:
                        d, o, lo, hi = dy, bs_y, rects[b, 1], rects[b, 3]
                    if d == 0.0:
                        if o < lo or o > hi:
                            ok = False
                            break
                    else:
                        t1 = (lo - o) / d
                        t2 = (hi - o) / d
                        if t1 > t2:
                            t1, t2 = t2, t1
                        if t1 > tmin:
                            tmin = t1
                        if t2 < tmax:
                            tmax = t2
                if ok and tmin <= tmax:
                    flag = np.uint8(0)
                    break
            out[c] = flag
        return out

    def los_flags(bs_x, bs_y, px, py, rects):
        return _los_flags_numba(
            float(bs_x), float(bs_y),
            np.ascontiguousarray(px, dtype=np.float64),
            np.ascontiguousarray(py, dtype=np.float64),
            np.ascontiguousarray(rects, dtype=np.float64).reshape(-1, 4),
        )

    @njit(cache=True, parallel=True)
    def _idw_numba(tx, ty, ox, oy, values, k, power):  # pragma: no cover - jit
        nt = tx.shape[0]
        no = ox.shape[0]
        kk = min(k, no)
        out = np.empty(nt, dtype=np.float64)
        for c in prange(nt):
            best_d = np.full(kk, np.inf)
            best_v = np.zeros(kk)
            for o in range(no):
                d2 = (tx[c] - ox[o]) ** 2 + (ty[c] - oy[o]) ** 2
                if d2 < best_d[kk - 1]:
                    pos = kk - 1
                    while pos > 0 and best_d[pos - 1] > d2:
                        best_d[pos] = best_d[pos - 1]
                        best_v[pos] = best_v[pos - 1]
                        pos -= 1
                    best_d[pos] = d2
                    best_v[pos] = values[o]
            if best_d[0] == 0.0:
                out[c] = best_v[0]
            else:
                wsum = 0.0
                vsum = 0.0
                for i in range(kk):
                    w = 1.0 / best_d[i] ** (0.5 * power)
                    wsum += w
                    vsum += w * best_v[i]
                out[c] = vsum / wsum
        return out

    def idw(tx, ty, ox, oy, values, k, power):
        return _idw_numba(
            np.ascontiguousarray(tx, dtype=np.float64),
            np.ascontiguousarray(ty, dtype=np.float64),
            np.ascontiguousarray(ox, dtype=np.float64),
            np.ascontiguousarray(oy, dtype=np.float64),
            np.ascontiguousarray(values, dtype=np.float64),
            int(k), float(power),
        )

    @njit(cache=True, parallel=True)
    def _grouped_solve_numba(inv_stack, group, rhs):  # pragma: no cover - jit
        nc, m = rhs.shape
        out = np.empty((nc, m), dtype=np.float64)
        for c in prange(nc):
            g = group[c]
            for i in range(m):
                acc = 0.0
                for j in range(m):
                    acc += inv_stack[g, i, j] * rhs[c, j]
                out[c, i] = acc
        return out

    def grouped_solve(inv_stack, group, rhs):
        return _grouped_solve_numba(
            np.ascontiguousarray(inv_stack, dtype=np.float64),
            np.ascontiguousarray(group, dtype=np.int64),
            np.ascontiguousarray(rhs, dtype=np.float64),
        )

else:
    def los_flags(bs_x, bs_y, px, py, rects):
        return los_flags_numpy(
            float(bs_x), float(bs_y), px, py,
            np.asarray(rects, dtype=np.float64).reshape(-1, 4))

    idw = idw_numpy
    grouped_solve = grouped_solve_numpy

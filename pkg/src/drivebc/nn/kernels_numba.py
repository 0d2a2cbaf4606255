"""Numba-compiled LSTM sequence kernels (default backend).

Same contract as kernels_numpy: time-major shapes, (T, B, 5H) activation
cache holding the gates [i, f, g, o] and tanh(c_new). Matmuls dispatch to
BLAS through np.dot. The gate nonlinearities are built on a range-reduced
exp(y <= 0) in expm1 form (cancellation-free near zero, relative error
~1e-15) and the loops are staged so LLVM can vectorize them: polynomial
passes first, the divisions in their own tight loops (a division inside a
mixed loop defeats the vectorizer and costs 4-5x).
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

_INV_LN2 = 1.4426950408889634
_LN2_HI = 6.93147180369123816490e-01
_LN2_LO = 1.90821492927058770002e-10


@njit(inline="always", fastmath=True)
def _expm1_neg(y):
    """expm1(y) for y in [-44, 0], exact to ~2 ulp even as y -> 0."""
    m = int(np.floor(0.5 - y * _INV_LN2))  # m = -round(y / ln 2) >= 0
    r = (y + m * _LN2_HI) + m * _LN2_LO
    q = r * (1.0 + r * (0.5 + r * (1.0 / 6 + r * (1.0 / 24 + r * (
        1.0 / 120 + r * (1.0 / 720 + r * (1.0 / 5040 + r * (1.0 / 40320 + r * (
            1.0 / 362880 + r * (1.0 / 3628800 + r * (1.0 / 39916800 + r * (
                1.0 / 479001600))))))))))))
    # 2**-m by bit decomposition: no table gather, stays vectorizable
    s = 1.0
    s *= 0.5 if (m & 1) != 0 else 1.0
    s *= 0.25 if (m & 2) != 0 else 1.0
    s *= 0.0625 if (m & 4) != 0 else 1.0
    s *= 3.90625e-03 if (m & 8) != 0 else 1.0
    s *= 1.52587890625e-05 if (m & 16) != 0 else 1.0
    s *= 2.3283064365386963e-10 if (m & 32) != 0 else 1.0
    return (s - 1.0) + s * q


@njit(cache=True, fastmath=True)
def lstm_seq_forward(x, w, u, b, h0, c0):
    T, B, I = x.shape
    H = u.shape[0]
    hs = np.empty((T + 1, B, H), dtype=x.dtype)
    cs = np.empty((T + 1, B, H), dtype=x.dtype)
    acts = np.empty((T, B, 5 * H), dtype=x.dtype)
    hs[0] = h0
    cs[0] = c0
    xw = np.dot(x.reshape(T * B, I), w).reshape(T, B, 4 * H)
    v = np.empty((B, 4 * H), dtype=x.dtype)
    em = np.empty((B, 4 * H), dtype=x.dtype)
    for t in range(T):
        pre = np.dot(hs[t], u)
        for bb in range(B):
            for k in range(4 * H):
                v[bb, k] = pre[bb, k] + xw[t, bb, k] + b[k]
        # exp intermediates: z - 1 for the sigmoid blocks, expm1(-2|v|) for g
        for bb in range(B):
            for k in range(2 * H):
                a = abs(v[bb, k])
                em[bb, k] = _expm1_neg(-(44.0 if a > 44.0 else a))
            for k in range(2 * H, 3 * H):
                a = 2.0 * abs(v[bb, k])
                em[bb, k] = _expm1_neg(-(38.0 if a > 38.0 else a))
            for k in range(3 * H, 4 * H):
                a = abs(v[bb, k])
                em[bb, k] = _expm1_neg(-(44.0 if a > 44.0 else a))
        # division stage: sigmoid = sel / (2 + em), tanh = -em / (2 + em)
        for bb in range(B):
            for k in range(2 * H):
                num = 1.0 if v[bb, k] >= 0.0 else 1.0 + em[bb, k]
                acts[t, bb, k] = num / (2.0 + em[bb, k])
            for k in range(2 * H, 3 * H):
                tt = -em[bb, k] / (2.0 + em[bb, k])
                acts[t, bb, k] = math.copysign(tt, v[bb, k])
            for k in range(3 * H, 4 * H):
                num = 1.0 if v[bb, k] >= 0.0 else 1.0 + em[bb, k]
                acts[t, bb, k] = num / (2.0 + em[bb, k])
        # cell update, then tanh(c_new) through the same two-stage pattern
        for bb in range(B):
            for k in range(H):
                cc = acts[t, bb, H + k] * cs[t, bb, k] \
                    + acts[t, bb, k] * acts[t, bb, 2 * H + k]
                cs[t + 1, bb, k] = cc
                a = 2.0 * abs(cc)
                em[bb, k] = _expm1_neg(-(38.0 if a > 38.0 else a))
        for bb in range(B):
            for k in range(H):
                tt = -em[bb, k] / (2.0 + em[bb, k])
                tc = math.copysign(tt, cs[t + 1, bb, k])
                acts[t, bb, 4 * H + k] = tc
                hs[t + 1, bb, k] = acts[t, bb, 3 * H + k] * tc
    return hs, cs, acts


@njit(cache=True, fastmath=True)
def lstm_dec_forward(ctx, w, u, b, h0, c0, steps):
    B = ctx.shape[0]
    H = u.shape[0]
    hs = np.empty((steps + 1, B, H), dtype=ctx.dtype)
    cs = np.empty((steps + 1, B, H), dtype=ctx.dtype)
    acts = np.empty((steps, B, 5 * H), dtype=ctx.dtype)
    hs[0] = h0
    cs[0] = c0
    xw = np.dot(ctx, w)
    v = np.empty((B, 4 * H), dtype=ctx.dtype)
    em = np.empty((B, 4 * H), dtype=ctx.dtype)
    for t in range(steps):
        pre = np.dot(hs[t], u)
        for bb in range(B):
            for k in range(4 * H):
                v[bb, k] = pre[bb, k] + xw[bb, k] + b[k]
        for bb in range(B):
            for k in range(2 * H):
                a = abs(v[bb, k])
                em[bb, k] = _expm1_neg(-(44.0 if a > 44.0 else a))
            for k in range(2 * H, 3 * H):
                a = 2.0 * abs(v[bb, k])
                em[bb, k] = _expm1_neg(-(38.0 if a > 38.0 else a))
            for k in range(3 * H, 4 * H):
                a = abs(v[bb, k])
                em[bb, k] = _expm1_neg(-(44.0 if a > 44.0 else a))
        for bb in range(B):
            for k in range(2 * H):
                num = 1.0 if v[bb, k] >= 0.0 else 1.0 + em[bb, k]
                acts[t, bb, k] = num / (2.0 + em[bb, k])
            for k in range(2 * H, 3 * H):
                tt = -em[bb, k] / (2.0 + em[bb, k])
                acts[t, bb, k] = math.copysign(tt, v[bb, k])
            for k in range(3 * H, 4 * H):
                num = 1.0 if v[bb, k] >= 0.0 else 1.0 + em[bb, k]
                acts[t, bb, k] = num / (2.0 + em[bb, k])
        for bb in range(B):
            for k in range(H):
                cc = acts[t, bb, H + k] * cs[t, bb, k] \
                    + acts[t, bb, k] * acts[t, bb, 2 * H + k]
                cs[t + 1, bb, k] = cc
                a = 2.0 * abs(cc)
                em[bb, k] = _expm1_neg(-(38.0 if a > 38.0 else a))
        for bb in range(B):
            for k in range(H):
                tt = -em[bb, k] / (2.0 + em[bb, k])
                tc = math.copysign(tt, cs[t + 1, bb, k])
                acts[t, bb, 4 * H + k] = tc
                hs[t + 1, bb, k] = acts[t, bb, 3 * H + k] * tc
    return hs, cs, acts


@njit(cache=True, fastmath=True)
def _bptt_steps(u, cs, acts, dh_out, dh_final, dc_final):
    T, B, H = dh_out.shape
    dpre = np.empty((T, B, 4 * H), dtype=cs.dtype)
    u_t = np.ascontiguousarray(u.T)
    dh_next = dh_final.copy()
    dc_next = dc_final.copy()
    for t in range(T - 1, -1, -1):
        for bb in range(B):
            for k in range(H):
                ig = acts[t, bb, k]
                fg = acts[t, bb, H + k]
                gg = acts[t, bb, 2 * H + k]
                og = acts[t, bb, 3 * H + k]
                tc = acts[t, bb, 4 * H + k]
                dh = dh_out[t, bb, k] + dh_next[bb, k]
                dc = dc_next[bb, k] + dh * og * (1.0 - tc * tc)
                dpre[t, bb, k] = dc * gg * ig * (1.0 - ig)
                dpre[t, bb, H + k] = dc * cs[t, bb, k] * fg * (1.0 - fg)
                dpre[t, bb, 2 * H + k] = dc * ig * (1.0 - gg * gg)
                dpre[t, bb, 3 * H + k] = dh * tc * og * (1.0 - og)
                dc_next[bb, k] = dc * fg
        dh_next = np.dot(dpre[t], u_t)
    return dpre, dh_next, dc_next


@njit(cache=True, fastmath=True)
def lstm_dec_backward(ctx, w, u, hs, cs, acts, dh_out, dh_final, dc_final):
    T, B, H = dh_out.shape
    dpre, dh0, dc0 = _bptt_steps(u, cs, acts, dh_out, dh_final, dc_final)
    flat = dpre.reshape(T * B, 4 * H)
    dpre_sum = np.zeros((B, 4 * H), dtype=ctx.dtype)
    for t in range(T):
        for bb in range(B):
            for k in range(4 * H):
                dpre_sum[bb, k] += dpre[t, bb, k]
    w_t = np.ascontiguousarray(w.T)
    dctx = np.dot(dpre_sum, w_t)
    dw = np.dot(ctx.T, dpre_sum)
    du = np.dot(hs[:T].reshape(T * B, H).T, flat)
    db = np.zeros(4 * H, dtype=ctx.dtype)
    for bb in range(B):
        for k in range(4 * H):
            db[k] += dpre_sum[bb, k]
    return dctx, dw, du, db, dh0, dc0


@njit(cache=True, fastmath=True)
def lstm_seq_backward(x, w, u, hs, cs, acts, dh_out, dh_final, dc_final):
    T, B, I = x.shape
    H = u.shape[0]
    dpre, dh0, dc0 = _bptt_steps(u, cs, acts, dh_out, dh_final, dc_final)
    flat = dpre.reshape(T * B, 4 * H)
    w_t = np.ascontiguousarray(w.T)
    dx = np.dot(flat, w_t).reshape(T, B, I)
    dw = np.dot(x.reshape(T * B, I).T, flat)
    du = np.dot(hs[:T].reshape(T * B, H).T, flat)
    db = np.zeros(4 * H, dtype=x.dtype)
    for r in range(T * B):
        for k in range(4 * H):
            db[k] += flat[r, k]
    return dx, dw, du, db, dh0, dc0

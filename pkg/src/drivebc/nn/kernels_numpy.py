"""Pure-numpy LSTM sequence kernels (fallback backend).

Shapes are time-major: inputs are (T, B, I), states (B, H). The activation
cache is (T, B, 5H): the four post-activation gates in the fixed order
[input, forget, candidate, output] followed by tanh of the new cell state,
so the backward pass needs no transcendentals at all. The dec_* variants
take one (B, C) context vector applied at every step, which turns the input
projections into single GEMMs. All math stays in the dtype of the inputs.
"""

from __future__ import annotations

import numpy as np


def _gate_activations(pre: np.ndarray, H: int) -> np.ndarray:
    """Apply sigmoid to the i, f, o blocks and tanh to the g block.

    Uses sigmoid(x) = (tanh(x/2) + 1) / 2 so one vectorized tanh pass covers
    the whole (B, 4H) matrix (and never overflows).
    """
    scaled = pre.copy()
    scaled[:, :2 * H] *= 0.5
    scaled[:, 3 * H:] *= 0.5
    t = np.tanh(scaled)
    t[:, :2 * H] += 1.0
    t[:, :2 * H] *= 0.5
    t[:, 3 * H:] += 1.0
    t[:, 3 * H:] *= 0.5
    return t


def _forward_steps(xw_of, u, hs, cs, acts, T, H):
    for t in range(T):
        g = _gate_activations(xw_of(t) + hs[t] @ u, H)
        acts[t, :, :4 * H] = g
        c_new = g[:, H:2 * H] * cs[t] + g[:, :H] * g[:, 2 * H:3 * H]
        cs[t + 1] = c_new
        tc = np.tanh(c_new)
        acts[t, :, 4 * H:] = tc
        hs[t + 1] = g[:, 3 * H:] * tc


def lstm_seq_forward(x, w, u, b, h0, c0):
    """Run an LSTM over a sequence.

    Args:
        x: (T, B, I) inputs.
        w: (I, 4H) input weights, gate-major blocks [i, f, g, o].
        u: (H, 4H) recurrent weights.
        b: (4H,) bias.
        h0, c0: (B, H) initial state.

    Returns:
        hs: (T+1, B, H) hidden states, hs[0] = h0.
        cs: (T+1, B, H) cell states, cs[0] = c0.
        acts: (T, B, 5H) cache: post-activation gates then tanh(c_new).
    """
    T, B, _ = x.shape
    H = u.shape[0]
    dtype = x.dtype
    hs = np.empty((T + 1, B, H), dtype=dtype)
    cs = np.empty((T + 1, B, H), dtype=dtype)
    acts = np.empty((T, B, 5 * H), dtype=dtype)
    hs[0] = h0
    cs[0] = c0
    xw = (x.reshape(T * B, -1) @ w + b).reshape(T, B, 4 * H)
    _forward_steps(lambda t: xw[t], u, hs, cs, acts, T, H)
    return hs, cs, acts


def lstm_dec_forward(ctx, w, u, b, h0, c0, steps):
    """Forward pass feeding the same (B, C) context vector at every step."""
    B = ctx.shape[0]
    H = u.shape[0]
    dtype = ctx.dtype
    hs = np.empty((steps + 1, B, H), dtype=dtype)
    cs = np.empty((steps + 1, B, H), dtype=dtype)
    acts = np.empty((steps, B, 5 * H), dtype=dtype)
    hs[0] = h0
    cs[0] = c0
    xw = ctx @ w + b
    _forward_steps(lambda t: xw, u, hs, cs, acts, steps, H)
    return hs, cs, acts


def _backward_steps(u, cs, acts, dh_out, dh_final, dc_final):
    """Shared BPTT recurrence; returns (dpre (T,B,4H), dh0, dc0)."""
    T, B, H = dh_out.shape
    dtype = cs.dtype
    dpre = np.empty((T, B, 4 * H), dtype=dtype)
    u_t = np.ascontiguousarray(u.T)
    dh_next = dh_final.astype(dtype, copy=True)
    dc_next = dc_final.astype(dtype, copy=True)
    for t in range(T - 1, -1, -1):
        i = acts[t, :, :H]
        f = acts[t, :, H:2 * H]
        g = acts[t, :, 2 * H:3 * H]
        o = acts[t, :, 3 * H:4 * H]
        tanh_c = acts[t, :, 4 * H:]
        dh = dh_out[t] + dh_next
        dc = dc_next + dh * o * (1.0 - tanh_c * tanh_c)
        dpre[t, :, :H] = dc * g * i * (1.0 - i)
        dpre[t, :, H:2 * H] = dc * cs[t] * f * (1.0 - f)
        dpre[t, :, 2 * H:3 * H] = dc * i * (1.0 - g * g)
        dpre[t, :, 3 * H:] = dh * tanh_c * o * (1.0 - o)
        dh_next = dpre[t] @ u_t
        dc_next = dc * f
    return dpre, dh_next, dc_next


def lstm_seq_backward(x, w, u, hs, cs, acts, dh_out, dh_final, dc_final):
    """Backpropagate through an unrolled LSTM.

    Args:
        x, w, u: as in the forward pass.
        hs, cs, acts: forward-pass caches.
        dh_out: (T, B, H) gradient on each step's hidden output.
        dh_final, dc_final: (B, H) extra gradient on the last state.

    Returns:
        dx: (T, B, I), dw, du, db, dh0, dc0.
    """
    T, B, _ = x.shape
    H = u.shape[0]
    dpre, dh0, dc0 = _backward_steps(u, cs, acts, dh_out, dh_final, dc_final)
    flat_pre = dpre.reshape(T * B, 4 * H)
    dx = (flat_pre @ w.T).reshape(x.shape)
    dw = x.reshape(T * B, -1).T @ flat_pre
    du = hs[:T].reshape(T * B, H).T @ flat_pre
    db = flat_pre.sum(axis=0)
    return dx, dw, du, db, dh0, dc0


def lstm_dec_backward(ctx, w, u, hs, cs, acts, dh_out, dh_final, dc_final):
    """Backward counterpart of lstm_dec_forward.

    Because the input repeats, its gradient sums over steps first, keeping
    every GEMM at (B, .) instead of (T*B, .). Returns
    (dctx, dw, du, db, dh0, dc0).
    """
    T, B, H = dh_out.shape
    dpre, dh0, dc0 = _backward_steps(u, cs, acts, dh_out, dh_final, dc_final)
    flat_pre = dpre.reshape(T * B, 4 * H)
    dpre_sum = dpre.sum(axis=0)
    dctx = dpre_sum @ w.T
    dw = ctx.T @ dpre_sum
    du = hs[:T].reshape(T * B, H).T @ flat_pre
    db = dpre_sum.sum(axis=0)
    return dctx, dw, du, db, dh0, dc0

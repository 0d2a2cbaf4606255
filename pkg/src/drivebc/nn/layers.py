"""Dense and LSTM building blocks.

Parameters are plain float arrays. LSTM weights are stored input-major
(w: (I, 4H), u: (H, 4H)) with the gate blocks ordered [input, forget,
candidate, output]; serialized artifacts tag this order so parameters stay
unambiguous.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .backend import lstm_dec_forward, lstm_seq_forward

ACTIVATIONS = ("linear", "relu", "tanh")


class ShapeError(ValueError):
    pass


def _check_matmul(x: np.ndarray, w: np.ndarray) -> None:
    if x.shape[-1] != w.shape[0]:
        raise ShapeError(f"cannot multiply shapes {x.shape} @ {w.shape}")


def dense_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray,
                  activation: str = "linear") -> np.ndarray:
    """x @ w + b with an elementwise activation ('linear', 'relu', 'tanh')."""
    x = np.asarray(x, dtype=np.float64)
    _check_matmul(x, w)
    if b.shape[-1] != w.shape[1]:
        raise ShapeError(f"bias shape {b.shape} does not match weight shape {w.shape}")
    z = x @ w + b
    if activation == "linear":
        return z
    if activation == "relu":
        return np.maximum(z, 0.0)
    if activation == "tanh":
        return np.tanh(z)
    raise ValueError(f"unknown activation {activation!r}")


def dense_backward(dout: np.ndarray, x: np.ndarray, w: np.ndarray,
                   out: np.ndarray, activation: str = "linear"):
    """Gradients of dense_forward given the upstream gradient.

    Returns (dx, dw, db). ``out`` is the forward output (used to invert the
    activation without recomputing).
    """
    if activation == "relu":
        dz = dout * (out > 0)
    elif activation == "tanh":
        dz = dout * (1.0 - out * out)
    elif activation == "linear":
        dz = dout
    else:
        raise ValueError(f"unknown activation {activation!r}")
    dx = dz @ w.T
    dw = x.reshape(-1, x.shape[-1]).T @ dz.reshape(-1, dz.shape[-1])
    db = dz.reshape(-1, dz.shape[-1]).sum(axis=0)
    return dx, dw, db


@dataclass(frozen=True, eq=False)
class LstmCellParams:
    """One LSTM cell's weights; hidden size H and input size I are implied."""

    w: np.ndarray  # (I, 4H)
    u: np.ndarray  # (H, 4H)
    b: np.ndarray  # (4H,)

    def __post_init__(self):
        h = self.u.shape[0]
        if self.u.shape != (h, 4 * h):
            raise ShapeError(f"recurrent weights must be (H, 4H), got {self.u.shape}")
        if self.w.ndim != 2 or self.w.shape[1] != 4 * h:
            raise ShapeError(f"input weights must be (I, 4H), got {self.w.shape}")
        if self.b.shape != (4 * h,):
            raise ShapeError(f"bias must be (4H,), got {self.b.shape}")

    @property
    def hidden_size(self) -> int:
        return self.u.shape[0]

    @property
    def input_size(self) -> int:
        return self.w.shape[0]


def lstm_cell_step(x: np.ndarray, h: np.ndarray, c: np.ndarray,
                   p: LstmCellParams) -> tuple[np.ndarray, np.ndarray]:
    """One LSTM step for a single sample; returns (h', c')."""
    x = np.asarray(x, dtype=np.float64).reshape(1, 1, -1)
    if x.shape[2] != p.input_size:
        raise ShapeError(f"input size {x.shape[2]} does not match weights {p.w.shape}")
    h = np.ascontiguousarray(h, dtype=np.float64).reshape(1, -1)
    c = np.ascontiguousarray(c, dtype=np.float64).reshape(1, -1)
    hs, cs, _ = lstm_seq_forward(np.ascontiguousarray(x), p.w, p.u, p.b, h, c)
    return hs[1, 0], cs[1, 0]


def run_encoder(seq: np.ndarray, p: LstmCellParams) -> tuple[np.ndarray, np.ndarray]:
    """Fold a (T, I) sequence from the zero state; returns the final (h, c)."""
    seq = np.asarray(seq, dtype=np.float64)
    if seq.ndim != 2:
        raise ShapeError(f"sequence must be (T, I), got {seq.shape}")
    if seq.shape[0] < 1:
        raise ValueError("encoder needs at least one step")
    if seq.shape[1] != p.input_size:
        raise ShapeError(f"input size {seq.shape[1]} does not match weights {p.w.shape}")
    T = seq.shape[0]
    h = np.zeros((1, p.hidden_size))
    x = np.ascontiguousarray(seq.reshape(T, 1, -1))
    hs, cs, _ = lstm_seq_forward(x, p.w, p.u, p.b, h, h.copy())
    return hs[T, 0], cs[T, 0]


def run_decoder(init: tuple[np.ndarray, np.ndarray], context: np.ndarray,
                steps: int, p: LstmCellParams, head_w: np.ndarray,
                head_b: np.ndarray) -> np.ndarray:
    """Unroll the decoder for a fixed number of steps.

    Every step consumes the same context vector; a linear head maps each
    hidden state to a 2-vector. Returns (steps, 2).
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    context = np.asarray(context, dtype=np.float64).reshape(-1)
    if context.shape[0] != p.input_size:
        raise ShapeError(f"context size {context.shape[0]} does not match weights {p.w.shape}")
    h0, c0 = init
    h = np.ascontiguousarray(h0, dtype=np.float64).reshape(1, -1)
    c = np.ascontiguousarray(c0, dtype=np.float64).reshape(1, -1)
    ctx = np.ascontiguousarray(context.reshape(1, -1))
    hs, _, _ = lstm_dec_forward(ctx, p.w, p.u, p.b, h, c, steps)
    return dense_forward(hs[1:, 0, :], head_w, head_b, "linear")


def init_dense(rng: np.random.Generator, n_in: int, n_out: int):
    """Uniform(-s, s) weights with s = 1/sqrt(fan_in); zero bias."""
    s = 1.0 / np.sqrt(n_in)
    return rng.uniform(-s, s, size=(n_in, n_out)), np.zeros(n_out)


def init_lstm(rng: np.random.Generator, n_in: int, hidden: int) -> LstmCellParams:
    """Seeded LSTM init; forget-gate bias starts at 1.0."""
    sw = 1.0 / np.sqrt(n_in)
    su = 1.0 / np.sqrt(hidden)
    w = rng.uniform(-sw, sw, size=(n_in, 4 * hidden))
    u = rng.uniform(-su, su, size=(hidden, 4 * hidden))
    b = np.zeros(4 * hidden)
    b[hidden:2 * hidden] = 1.0
    return LstmCellParams(w=w, u=u, b=b)

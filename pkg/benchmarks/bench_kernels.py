"""Compare the numba and numpy LSTM kernel backends.

Runs the sequence and decoder kernels at a few batch sizes and prints a
throughput table. Usage:

    python benchmarks/bench_kernels.py [--repeats 20]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from drivebc.nn import get_kernels

HIDDEN = 128
HISTORY = 10
HORIZON = 5
FEATURES = 12


def _time(fn, repeats: int) -> float:
    fn()  # warm up (JIT compile on the numba path)
    t0 = time.perf_counter()
    for _ in range(repeats):
        fn()
    return (time.perf_counter() - t0) / repeats


def bench(batch: int, repeats: int) -> list[tuple[str, str, float, float]]:
    rng = np.random.default_rng(0)
    x = np.ascontiguousarray(rng.normal(size=(HISTORY, batch, FEATURES)))
    w = rng.normal(size=(FEATURES, 4 * HIDDEN)) * 0.2
    wd = rng.normal(size=(HIDDEN, 4 * HIDDEN)) * 0.2
    u = rng.normal(size=(HIDDEN, 4 * HIDDEN)) * 0.2
    b = np.zeros(4 * HIDDEN)
    zero = np.zeros((batch, HIDDEN))
    ctx = np.ascontiguousarray(rng.normal(size=(batch, HIDDEN)))
    dh_seq = rng.normal(size=(HISTORY, batch, HIDDEN))
    dh_dec = rng.normal(size=(HORIZON, batch, HIDDEN))

    rows = []
    for name in ("numpy", "numba"):
        mod = get_kernels(name)
        hs, cs, acts = mod.lstm_seq_forward(x, w, u, b, zero, zero.copy())
        t_fwd = _time(lambda: mod.lstm_seq_forward(x, w, u, b, zero, zero.copy()),
                      repeats)
        t_bwd = _time(lambda: mod.lstm_seq_backward(
            x, w, u, hs, cs, acts, dh_seq, zero, zero.copy()), repeats)
        rows.append((name, "encoder", t_fwd, t_bwd))
        dhs, dcs, dacts = mod.lstm_dec_forward(ctx, wd, u, b, zero, zero.copy(),
                                               HORIZON)
        t_fwd = _time(lambda: mod.lstm_dec_forward(
            ctx, wd, u, b, zero, zero.copy(), HORIZON), repeats)
        t_bwd = _time(lambda: mod.lstm_dec_backward(
            ctx, wd, u, dhs, dcs, dacts, dh_dec, zero, zero.copy()), repeats)
        rows.append((name, "decoder", t_fwd, t_bwd))
    return rows


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=20)
    parser.add_argument("--batches", type=int, nargs="+", default=[64, 256])
    args = parser.parse_args()

    print(f"{'batch':>6} {'backend':>8} {'kernel':>8} {'fwd ms':>8} "
          f"{'bwd ms':>8} {'windows/s':>10}")
    for batch in args.batches:
        for name, kernel, t_fwd, t_bwd in bench(batch, args.repeats):
            rate = batch / (t_fwd + t_bwd)
            print(f"{batch:>6} {name:>8} {kernel:>8} {t_fwd * 1e3:>8.2f} "
                  f"{t_bwd * 1e3:>8.2f} {rate:>10.0f}")


if __name__ == "__main__":
    main()

"""Independent reference implementations used to check the library.

Everything here is deliberately written from scratch against the underlying
math (dense point sampling, textbook formulas) and must not call into the
code paths it verifies.
"""

from __future__ import annotations

import math

import numpy as np


def corridor_intersects_sampled(center_xy, length, width, heading,
                                tolerance, max_range, step=0.01) -> bool:
    """Dense-sampling rectangle-vs-corridor intersection test.

    Samples the box interior and boundary on a `step` grid and tests the
    points against the corridor; also samples the corridor region near the
    box and tests those points against the box (which catches degenerate
    zero-tolerance corridors). Resolution-limited: answers within ~step of
    the boundary are unreliable.
    """
    cx, cy = float(center_xy[0]), float(center_xy[1])
    half_l, half_w = length / 2.0, width / 2.0
    cos_h, sin_h = math.cos(heading), math.sin(heading)

    # box grid in its own frame, mapped to the ego frame
    nu = max(2, int(math.ceil(length / step)) + 1)
    nv = max(2, int(math.ceil(width / step)) + 1)
    us = np.linspace(-half_l, half_l, nu)
    vs = np.linspace(-half_w, half_w, nv)
    uu, vv = np.meshgrid(us, vs, indexing="ij")
    px = cx + uu * cos_h - vv * sin_h
    py = cy + uu * sin_h + vv * cos_h
    if np.any((px >= 0.0) & (px <= max_range)
              & (np.abs(py) <= tolerance)):
        return True

    # corridor grid clipped to the box's bounding circle
    radius = math.hypot(half_l, half_w) + step
    x_lo = max(0.0, cx - radius)
    x_hi = min(max_range, cx + radius)
    if x_hi < x_lo:
        return False
    nx = max(2, int(math.ceil((x_hi - x_lo) / step)) + 1)
    ny = max(2, int(math.ceil(2.0 * tolerance / step)) + 1) if tolerance > 0 else 1
    xs = np.linspace(x_lo, x_hi, nx)
    ys = np.linspace(-tolerance, tolerance, ny) if tolerance > 0 else np.array([0.0])
    xx, yy = np.meshgrid(xs, ys, indexing="ij")
    # into the box frame
    rx = xx - cx
    ry = yy - cy
    bu = rx * cos_h + ry * sin_h
    bv = -rx * sin_h + ry * cos_h
    return bool(np.any((np.abs(bu) <= half_l) & (np.abs(bv) <= half_w)))


def reference_lstm_step(x, h, c, w, u, b):
    """Textbook LSTM cell step (gate order i, f, g, o), straight numpy."""
    pre = x @ w + h @ u + b
    hidden = h.shape[-1]
    with np.errstate(over="ignore"):
        i = 1.0 / (1.0 + np.exp(-pre[..., :hidden]))
        f = 1.0 / (1.0 + np.exp(-pre[..., hidden:2 * hidden]))
        g = np.tanh(pre[..., 2 * hidden:3 * hidden])
        o = 1.0 / (1.0 + np.exp(-pre[..., 3 * hidden:]))
    c_new = f * c + i * g
    h_new = o * np.tanh(c_new)
    return h_new, c_new


def transform_row_vector(point, matrix4):
    """[p, 1] @ M through an explicit 4x4 product, no shortcuts."""
    p = np.array([point[0], point[1], point[2], 1.0])
    out = np.zeros(4)
    for col in range(4):
        for row in range(4):
            out[col] += p[row] * matrix4[row][col]
    return out[:3] / out[3]


def random_pose(rng: np.random.Generator) -> np.ndarray:
    """Random proper-rotation row-vector pose matrix via QR."""
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q @ np.diag(np.sign(np.diag(r)))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    m = np.eye(4)
    m[:3, :3] = q.T  # row-vector convention
    m[3, :3] = rng.uniform(-50, 50, size=3)
    return m


def ridge_probe_balanced_accuracy(features, labels, train_frac=0.7,
                                  lam=1e-3, seed=0) -> float:
    """Linear probe: ridge regression on +-1 labels, scored on held-out rows.

    The decision threshold is the midpoint of the per-class score means on
    the training split, so class imbalance does not bias it. Returns
    balanced accuracy (mean of per-class recalls): 0.5 for uninformative
    features regardless of prevalence.
    """
    rng = np.random.default_rng(seed)
    n = len(features)
    order = rng.permutation(n)
    n_train = int(n * train_frac)
    tr, te = order[:n_train], order[n_train:]
    x = np.hstack([features, np.ones((n, 1))])
    y = np.where(labels, 1.0, -1.0)
    a = x[tr].T @ x[tr] + lam * np.eye(x.shape[1])
    wgt = np.linalg.solve(a, x[tr].T @ y[tr])
    scores_tr = x[tr] @ wgt
    lab_tr = labels[tr]
    if lab_tr.all() or (~lab_tr).all():
        threshold = 0.0
    else:
        threshold = 0.5 * (scores_tr[lab_tr].mean() + scores_tr[~lab_tr].mean())
    pred = x[te] @ wgt >= threshold
    truth = labels[te]
    if truth.all() or (~truth).all():
        return float((pred == truth).mean())
    recall_pos = (pred & truth).sum() / truth.sum()
    recall_neg = (~pred & ~truth).sum() / (~truth).sum()
    return float(0.5 * (recall_pos + recall_neg))

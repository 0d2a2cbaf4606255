"""Training losses over prediction tensors."""

from __future__ import annotations

import numpy as np

LOSSES = ("mse", "mae")


def loss(pred: np.ndarray, target: np.ndarray, kind: str = "mse") -> float:
    """Mean over all elements of the squared (mse) or absolute (mae) error."""
    if pred.shape != target.shape:
        raise ValueError(f"prediction shape {pred.shape} does not match "
                         f"target shape {target.shape}")
    delta = pred - target
    if kind == "mse":
        return float(np.mean(delta * delta))
    if kind == "mae":
        return float(np.mean(np.abs(delta)))
    raise ValueError(f"unknown loss {kind!r}")


def loss_grad(pred: np.ndarray, target: np.ndarray, kind: str = "mse") -> np.ndarray:
    """Gradient of loss() with respect to pred."""
    if pred.shape != target.shape:
        raise ValueError(f"prediction shape {pred.shape} does not match "
                         f"target shape {target.shape}")
    delta = pred - target
    n = delta.size
    if kind == "mse":
        return (2.0 / n) * delta
    if kind == "mae":
        return np.sign(delta) / n
    raise ValueError(f"unknown loss {kind!r}")

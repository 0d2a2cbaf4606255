"""Adam optimizer over named parameter dicts."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

Params = dict[str, np.ndarray]


@dataclass
class AdamState:
    """First/second moment accumulators, keyed like the parameters."""

    step: int = 0
    m: Params = field(default_factory=dict)
    v: Params = field(default_factory=dict)


def adam_step(params: Params, grads: Params, state: AdamState, lr: float,
              beta1: float = 0.9, beta2: float = 0.999,
              eps: float = 1e-8) -> tuple[Params, AdamState]:
    """One bias-corrected Adam update; returns new params and state."""
    t = state.step + 1
    new_params: Params = {}
    new_m: Params = {}
    new_v: Params = {}
    bc1 = 1.0 - beta1 ** t
    bc2 = 1.0 - beta2 ** t
    for name, p in params.items():
        g = grads[name]
        if g.shape != p.shape:
            raise ValueError(f"gradient shape {g.shape} does not match "
                             f"parameter {name!r} shape {p.shape}")
        m = state.m.get(name)
        v = state.v.get(name)
        m = beta1 * m + (1.0 - beta1) * g if m is not None else (1.0 - beta1) * g
        v = beta2 * v + (1.0 - beta2) * (g * g) if v is not None else (1.0 - beta2) * (g * g)
        m_hat = m / bc1
        v_hat = v / bc2
        new_params[name] = p - lr * m_hat / (np.sqrt(v_hat) + eps)
        new_m[name] = m
        new_v[name] = v
    return new_params, AdamState(step=t, m=new_m, v=new_v)

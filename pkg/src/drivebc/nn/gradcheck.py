"""Finite-difference verification of analytic gradients."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .adam import Params


@dataclass(frozen=True)
class GradCheckReport:
    """Worst-case disagreement between analytic and numeric gradients."""

    max_rel_error: float
    worst_param: str
    passed: bool
    tol: float
    per_param: dict[str, float]

    def __str__(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"{status}: max relative error {self.max_rel_error:.3e} "
                f"(worst: {self.worst_param}, tol {self.tol:g})")


def grad_check(loss_fn: Callable[[Params], float], params: Params,
               analytic: Params, eps: float = 1e-5,
               tol: float = 1e-4) -> GradCheckReport:
    """Compare analytic gradients against central finite differences.

    Every parameter entry is perturbed by ±eps; the relative error is
    ``|a - n| / max(|a| + |n|, 1e-6)``. Intended for small models (the cost
    is two loss evaluations per parameter).
    """
    work = {name: np.array(p, dtype=np.float64) for name, p in params.items()}
    per_param: dict[str, float] = {}
    worst = 0.0
    worst_name = ""
    for name, p in work.items():
        a = analytic[name]
        flat = p.reshape(-1)
        num = np.empty_like(flat)
        for idx in range(flat.size):
            orig = flat[idx]
            flat[idx] = orig + eps
            up = loss_fn(work)
            flat[idx] = orig - eps
            down = loss_fn(work)
            flat[idx] = orig
            num[idx] = (up - down) / (2.0 * eps)
        a_flat = np.asarray(a, dtype=np.float64).reshape(-1)
        denom = np.maximum(np.abs(a_flat) + np.abs(num), 1e-6)
        rel = float((np.abs(a_flat - num) / denom).max()) if flat.size else 0.0
        per_param[name] = rel
        if rel > worst:
            worst = rel
            worst_name = name
    return GradCheckReport(max_rel_error=worst, worst_param=worst_name,
                           passed=worst <= tol, tol=tol, per_param=per_param)

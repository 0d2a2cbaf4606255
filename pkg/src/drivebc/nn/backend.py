"""Kernel backend selection.

The LSTM sequence kernels exist twice: a numba-compiled version (default)
and a pure-numpy fallback. Set ``DRIVEBC_BACKEND=numpy`` or ``=numba`` to
force one; anything else (or unset) picks numba when importable.
"""

from __future__ import annotations

import os

_ENV_VAR = "DRIVEBC_BACKEND"


def _select() -> str:
    requested = os.environ.get(_ENV_VAR, "auto").strip().lower() or "auto"
    if requested == "numpy":
        return "numpy"
    if requested == "numba":
        import numba  # noqa: F401  (fail loudly if forced but missing)
        return "numba"
    if requested == "auto":
        try:
            import numba  # noqa: F401
            return "numba"
        except ImportError:
            return "numpy"
    raise ValueError(f"{_ENV_VAR} must be 'numba', 'numpy' or 'auto', got {requested!r}")


BACKEND = _select()

if BACKEND == "numba":
    from .kernels_numba import (lstm_dec_backward, lstm_dec_forward,
                                lstm_seq_backward, lstm_seq_forward)
else:
    from .kernels_numpy import (lstm_dec_backward, lstm_dec_forward,
                                lstm_seq_backward, lstm_seq_forward)


def backend_name() -> str:
    """Active kernel backend, 'numba' or 'numpy'."""
    return BACKEND


def get_kernels(name: str | None = None):
    """Kernel module for an explicit backend name.

    Used by the benchmark to compare both implementations regardless of the
    environment selection.
    """
    name = name or BACKEND
    if name == "numba":
        from . import kernels_numba as mod
    elif name == "numpy":
        from . import kernels_numpy as mod
    else:
        raise ValueError(f"unknown backend {name!r}")
    return mod


__all__ = ["BACKEND", "backend_name", "get_kernels", "lstm_dec_backward",
           "lstm_dec_forward", "lstm_seq_backward", "lstm_seq_forward"]

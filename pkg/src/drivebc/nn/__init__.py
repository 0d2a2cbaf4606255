"""Minimal neural toolkit: dense + LSTM layers, Adam, losses, gradient checks.

Hot sequence kernels are numba-compiled by default with a pure-numpy
fallback; see backend.backend_name().
"""

from .adam import AdamState, Params, adam_step
from .backend import (backend_name, get_kernels, lstm_dec_backward,
                      lstm_dec_forward, lstm_seq_backward, lstm_seq_forward)
from .gradcheck import GradCheckReport, grad_check
from .layers import (ACTIVATIONS, LstmCellParams, ShapeError, dense_backward,
                     dense_forward, init_dense, init_lstm, lstm_cell_step,
                     run_decoder, run_encoder)
from .losses import LOSSES, loss, loss_grad

__all__ = [
    "ACTIVATIONS", "LOSSES", "AdamState", "GradCheckReport", "LstmCellParams",
    "Params", "ShapeError", "adam_step", "backend_name", "dense_backward",
    "dense_forward", "get_kernels", "grad_check", "init_dense", "init_lstm",
    "loss", "loss_grad", "lstm_cell_step", "lstm_dec_backward",
    "lstm_dec_forward", "lstm_seq_backward", "lstm_seq_forward",
    "run_decoder", "run_encoder",
]

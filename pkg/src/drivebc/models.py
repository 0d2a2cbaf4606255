"""Model architectures, training, and prediction.

Five variants share one interface:

* ``baseline_nn``  - per-frame dense net 12 -> 8 -> 4 -> 2 (relu, relu,
  linear). On windows it predicts every horizon frame from the last history
  frame's features.
* ``stacked_lr``   - ridge bases on the flattened feature window combined by
  an unregularized second-layer linear fit on held-out folds.
* ``lstm_12``      - LSTM encoder over the 12 features, decoder unrolls the
  horizon from the encoder's final state, with that hidden state repeated as
  the decoder input; a linear head emits (a_x, a_y) per step.
* ``lstm_front``   - adds a second encoder over front-camera embeddings; the
  final (h, c) of all encoders are concatenated and projected by one dense
  layer to the decoder's initial state.
* ``lstm_all``     - same with encoders for all five camera views.

Training is mini-batch Adam over mse (or mae), fully deterministic in the
seed: parameter init, shuffling and accumulation order are all fixed.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .archive import WindowBatch, read_container, write_container
from .data import NUM_FEATURES, CameraView, WindowSample
from .features import NormalizerStats, normalize_features
from .nn import (AdamState, Params, adam_step, grad_check, init_dense,
                 init_lstm, loss, loss_grad, lstm_dec_backward,
                 lstm_dec_forward, lstm_seq_backward, lstm_seq_forward)
from .nn.gradcheck import GradCheckReport

VARIANTS = ("baseline_nn", "stacked_lr", "lstm_12", "lstm_front", "lstm_all")
LSTM_VARIANTS = ("lstm_12", "lstm_front", "lstm_all")
ARTIFACT_VERSION = 1
GATE_ORDER = "ifgo"


class ConfigurationError(ValueError):
    pass


class TrainingDivergedError(RuntimeError):
    pass


class StackedRegressorError(RuntimeError):
    pass


@dataclass(frozen=True)
class ArchitectureSpec:
    """Which variant to build and its sizes."""

    variant: str
    hidden: int = 128
    embedding_dim: Optional[int] = None
    history_len: int = 10
    horizon_len: int = 5
    base_count: int = 3  # stacked_lr only

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigurationError(f"unknown variant {self.variant!r}")
        if self.variant in ("lstm_front", "lstm_all") and not self.embedding_dim:
            raise ConfigurationError(f"{self.variant} requires embedding_dim")
        if self.base_count < 1:
            raise ConfigurationError("base_count must be >= 1")

    @property
    def views(self) -> tuple[str, ...]:
        if self.variant == "lstm_front":
            return (CameraView.FRONT.value,)
        if self.variant == "lstm_all":
            return tuple(v.value for v in CameraView)
        return ()

    @property
    def channels(self) -> tuple[str, ...]:
        """Encoder input channels, features first."""
        return ("feat",) + self.views


@dataclass(frozen=True)
class TrainConfig:
    """Optimization settings."""

    epochs: int = 300
    batch_size: int = 64
    learning_rate: float = 1e-3
    seed: int = 0
    loss: str = "mse"

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1:
            raise ConfigurationError("epochs and batch_size must be >= 1")
        if self.learning_rate <= 0:
            raise ConfigurationError("learning_rate must be > 0")
        if self.loss not in ("mse", "mae"):
            raise ConfigurationError(f"unknown loss {self.loss!r}")


@dataclass(eq=False)
class ModelArtifact:
    """Trained parameters plus everything needed to reproduce predictions."""

    architecture: str
    hidden: int
    history_len: int
    horizon_len: int
    embedding_dim: Optional[int]
    params: Params
    normalizer: NormalizerStats
    config: dict
    history: list[float] = field(default_factory=list)

    @property
    def spec(self) -> ArchitectureSpec:
        return ArchitectureSpec(
            variant=self.architecture, hidden=self.hidden,
            embedding_dim=self.embedding_dim, history_len=self.history_len,
            horizon_len=self.horizon_len,
            base_count=int(self.config.get("base_count", 3)))

    def validate(self) -> None:
        for name, p in self.params.items():
            if not np.all(np.isfinite(p)):
                raise ValueError(f"parameter {name!r} contains non-finite values")


@dataclass(eq=False)
class TrainingRun:
    """Outcome of one training call."""

    artifact: ModelArtifact
    history: list[float]
    val_mae_x: float
    val_mae_y: float
    seconds: float


# ---------------------------------------------------------------------------
# Parameter initialization


def init_params(spec: ArchitectureSpec, seed: int) -> Params:
    """Seeded parameters; draw order is fixed so results are reproducible."""
    rng = np.random.default_rng(seed)
    params: Params = {}
    if spec.variant == "baseline_nn":
        params["l1.w"], params["l1.b"] = init_dense(rng, NUM_FEATURES, 8)
        params["l2.w"], params["l2.b"] = init_dense(rng, 8, 4)
        params["out.w"], params["out.b"] = init_dense(rng, 4, 2)
        return params
    if spec.variant == "stacked_lr":
        raise ConfigurationError("stacked_lr is fit in closed form, not initialized")
    h = spec.hidden
    for ch in spec.channels:
        dim = NUM_FEATURES if ch == "feat" else int(spec.embedding_dim)
        cell = init_lstm(rng, dim, h)
        params[f"enc_{ch}.w"] = cell.w
        params[f"enc_{ch}.u"] = cell.u
        params[f"enc_{ch}.b"] = cell.b
    if len(spec.channels) > 1:
        params["proj.w"], params["proj.b"] = init_dense(
            rng, 2 * h * len(spec.channels), 2 * h)
    dec = init_lstm(rng, h, h)
    params["dec.w"], params["dec.u"], params["dec.b"] = dec.w, dec.u, dec.b
    params["head.w"], params["head.b"] = init_dense(rng, h, 2)
    return params


def parameter_count(params: Params) -> int:
    return int(sum(p.size for p in params.values()))


# ---------------------------------------------------------------------------
# Input preparation


def prepare_inputs(spec: ArchitectureSpec, batch: WindowBatch,
                   stats: NormalizerStats,
                   idx: Optional[np.ndarray] = None) -> dict[str, np.ndarray]:
    """Normalized, time-major (T, N, dim) float64 inputs per channel."""
    feats = batch.features if idx is None else batch.features[idx]
    inputs = {"feat": np.ascontiguousarray(
        normalize_features(feats, stats).transpose(1, 0, 2))}
    for view in spec.views:
        if view not in batch.embeddings:
            raise ConfigurationError(
                f"{spec.variant} needs {view!r} embeddings but the data has none")
        emb = batch.embeddings[view] if idx is None else batch.embeddings[view][idx]
        if spec.embedding_dim is not None and emb.shape[2] != spec.embedding_dim:
            raise ConfigurationError(
                f"embedding dimension {emb.shape[2]} does not match the "
                f"model's {spec.embedding_dim}")
        inputs[view] = np.ascontiguousarray(emb.transpose(1, 0, 2))
    return inputs


# ---------------------------------------------------------------------------
# Forward / backward


def forward(spec: ArchitectureSpec, params: Params,
            inputs: dict[str, np.ndarray]) -> tuple[np.ndarray, dict]:
    """Predictions (N, horizon, 2) plus the cache for backward."""
    if spec.variant == "baseline_nn":
        return _forward_baseline(spec, params, inputs)
    if spec.variant in LSTM_VARIANTS:
        return _forward_lstm(spec, params, inputs)
    raise ConfigurationError(f"forward not defined for {spec.variant!r}")


def backward(spec: ArchitectureSpec, params: Params, cache: dict,
             dpred: np.ndarray) -> Params:
    """Parameter gradients given the loss gradient on the predictions."""
    if spec.variant == "baseline_nn":
        return _backward_baseline(spec, params, cache, dpred)
    if spec.variant in LSTM_VARIANTS:
        return _backward_lstm(spec, params, cache, dpred)
    raise ConfigurationError(f"backward not defined for {spec.variant!r}")


def _forward_baseline(spec, params, inputs):
    x = inputs["feat"][-1]  # (N, 12): last history frame
    a1 = np.maximum(x @ params["l1.w"] + params["l1.b"], 0.0)
    a2 = np.maximum(a1 @ params["l2.w"] + params["l2.b"], 0.0)
    out = a2 @ params["out.w"] + params["out.b"]
    pred = np.repeat(out[:, None, :], spec.horizon_len, axis=1)
    return pred, {"x": x, "a1": a1, "a2": a2}


def _backward_baseline(spec, params, cache, dpred):
    dout = dpred.sum(axis=1)
    grads: Params = {}
    grads["out.w"] = cache["a2"].T @ dout
    grads["out.b"] = dout.sum(axis=0)
    da2 = (dout @ params["out.w"].T) * (cache["a2"] > 0)
    grads["l2.w"] = cache["a1"].T @ da2
    grads["l2.b"] = da2.sum(axis=0)
    da1 = (da2 @ params["l2.w"].T) * (cache["a1"] > 0)
    grads["l1.w"] = cache["x"].T @ da1
    grads["l1.b"] = da1.sum(axis=0)
    return grads


def _forward_lstm(spec, params, inputs):
    h = spec.hidden
    k = spec.horizon_len
    n = inputs["feat"].shape[1]
    cache: dict = {"enc": {}}
    finals = []
    for ch in spec.channels:
        x = inputs[ch]
        zero = np.zeros((n, h))
        hs, cs, gates = lstm_seq_forward(x, params[f"enc_{ch}.w"],
                                         params[f"enc_{ch}.u"],
                                         params[f"enc_{ch}.b"], zero, zero.copy())
        cache["enc"][ch] = (x, hs, cs, gates)
        finals.append(hs[-1])
        finals.append(cs[-1])
    if len(spec.channels) == 1:
        h0, c0 = finals[0], finals[1]
        z = None
    else:
        z = np.concatenate(finals, axis=1)
        zo = z @ params["proj.w"] + params["proj.b"]
        h0, c0 = np.ascontiguousarray(zo[:, :h]), np.ascontiguousarray(zo[:, h:])
    # The decoder consumes its own initial hidden state as the repeated
    # context input at every step.
    dhs, dcs, dgates = lstm_dec_forward(h0, params["dec.w"], params["dec.u"],
                                        params["dec.b"], h0, c0, k)
    flat = dhs[1:].reshape(k * n, h)
    out = flat @ params["head.w"] + params["head.b"]
    pred = np.ascontiguousarray(out.reshape(k, n, 2).transpose(1, 0, 2))
    cache.update(z=z, h0=h0, dhs=dhs, dcs=dcs, dgates=dgates, flat=flat, n=n)
    return pred, cache


def _backward_lstm(spec, params, cache, dpred):
    h = spec.hidden
    k = spec.horizon_len
    n = cache["n"]
    grads: Params = {}
    dout = np.ascontiguousarray(dpred.transpose(1, 0, 2)).reshape(k * n, 2)
    grads["head.w"] = cache["flat"].T @ dout
    grads["head.b"] = dout.sum(axis=0)
    dh_dec = np.ascontiguousarray((dout @ params["head.w"].T).reshape(k, n, h))
    zero = np.zeros((n, h))
    dctx, dw, du, db, dh0_dec, dc0_dec = lstm_dec_backward(
        cache["h0"], params["dec.w"], params["dec.u"], cache["dhs"],
        cache["dcs"], cache["dgates"], dh_dec, zero, zero.copy())
    grads["dec.w"], grads["dec.u"], grads["dec.b"] = dw, du, db
    dh0 = dh0_dec + dctx  # decoder input is h0 repeated
    dc0 = dc0_dec

    if len(spec.channels) == 1:
        d_finals = [dh0, dc0]
    else:
        dzo = np.concatenate([dh0, dc0], axis=1)
        grads["proj.w"] = cache["z"].T @ dzo
        grads["proj.b"] = dzo.sum(axis=0)
        dz = dzo @ params["proj.w"].T
        d_finals = [np.ascontiguousarray(dz[:, i * h:(i + 1) * h])
                    for i in range(2 * len(spec.channels))]

    zero_seq = None
    for i, ch in enumerate(spec.channels):
        x, hs, cs, gates = cache["enc"][ch]
        if zero_seq is None or zero_seq.shape[0] != x.shape[0]:
            zero_seq = np.zeros((x.shape[0], n, h))
        _, dw, du, db, _, _ = lstm_seq_backward(
            x, params[f"enc_{ch}.w"], params[f"enc_{ch}.u"], hs, cs, gates,
            zero_seq, d_finals[2 * i], d_finals[2 * i + 1])
        grads[f"enc_{ch}.w"], grads[f"enc_{ch}.u"], grads[f"enc_{ch}.b"] = dw, du, db
    return grads


def loss_and_grads(spec: ArchitectureSpec, params: Params,
                   inputs: dict[str, np.ndarray], target: np.ndarray,
                   kind: str = "mse") -> tuple[float, Params]:
    pred, cache = forward(spec, params, inputs)
    value = loss(pred, target, kind)
    grads = backward(spec, params, cache, loss_grad(pred, target, kind))
    return value, grads


# ---------------------------------------------------------------------------
# Training


def _check_disjoint(train_batch: WindowBatch, val_batch: WindowBatch) -> None:
    overlap = train_batch.window_segment_ids() & val_batch.window_segment_ids()
    if overlap:
        raise ConfigurationError(
            f"train and validation share segments: {sorted(overlap)[:5]}")


def train(spec: ArchitectureSpec, train_batch: WindowBatch,
          val_batch: WindowBatch, cfg: TrainConfig,
          stats: Optional[NormalizerStats] = None,
          log: Optional[Callable[[str], None]] = None) -> TrainingRun:
    """Fit a model; returns the artifact plus loss history and val MAE.

    The normalizer must come from the training split (train_batch.normalizer
    or the explicit ``stats``); train and validation must not share segments.
    """
    from .evaluation import evaluate_predictions  # cycle: evaluation imports models

    _check_disjoint(train_batch, val_batch)
    stats = stats if stats is not None else train_batch.normalizer
    if stats is None:
        raise ConfigurationError("no normalizer: fit one on the training split first")

    t0 = time.perf_counter()
    if spec.variant == "stacked_lr":
        artifact, history = _fit_stacked(spec, train_batch, cfg, stats)
    else:
        artifact, history = _train_gradient(spec, train_batch, cfg, stats, log)
    preds = predict_batch(artifact, val_batch)
    report = evaluate_predictions(preds, val_batch, model_id=spec.variant)
    seconds = time.perf_counter() - t0
    return TrainingRun(artifact=artifact, history=history,
                       val_mae_x=report.mae_x, val_mae_y=report.mae_y,
                       seconds=seconds)


def _train_gradient(spec, train_batch, cfg, stats, log):
    inputs_all = prepare_inputs(spec, train_batch, stats)
    target_all = train_batch.target
    n = len(train_batch)
    params = init_params(spec, cfg.seed)
    state = AdamState()
    shuffle_rng = np.random.default_rng(cfg.seed + 1)
    history: list[float] = []
    for epoch in range(cfg.epochs):
        order = shuffle_rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            inputs = {ch: np.ascontiguousarray(arr[:, idx, :])
                      for ch, arr in inputs_all.items()}
            value, grads = loss_and_grads(spec, params, inputs,
                                          target_all[idx], cfg.loss)
            if not np.isfinite(value):
                norm = float(np.sqrt(sum(float((p * p).sum())
                                         for p in params.values())))
                raise TrainingDivergedError(
                    f"non-finite loss at epoch {epoch}, batch {start // cfg.batch_size} "
                    f"(parameter norm {norm:.3e})")
            params, state = adam_step(params, grads, state, cfg.learning_rate)
            epoch_loss += value * len(idx)
        history.append(epoch_loss / n)
        if log is not None and (epoch % 10 == 0 or epoch == cfg.epochs - 1):
            log(f"epoch {epoch + 1}/{cfg.epochs}  loss {history[-1]:.6f}")
    artifact = ModelArtifact(
        architecture=spec.variant, hidden=spec.hidden,
        history_len=spec.history_len, horizon_len=spec.horizon_len,
        embedding_dim=spec.embedding_dim, params=params, normalizer=stats,
        config=_config_snapshot(spec, cfg), history=history)
    artifact.validate()
    return artifact, history


def _config_snapshot(spec: ArchitectureSpec, cfg: TrainConfig) -> dict:
    return {
        "variant": spec.variant, "hidden": spec.hidden,
        "embedding_dim": spec.embedding_dim, "history_len": spec.history_len,
        "horizon_len": spec.horizon_len, "base_count": spec.base_count,
        "epochs": cfg.epochs, "batch_size": cfg.batch_size,
        "learning_rate": cfg.learning_rate, "seed": cfg.seed, "loss": cfg.loss,
    }


# ---------------------------------------------------------------------------
# Stacked linear regressor


def _stacked_lambdas(base_count: int) -> np.ndarray:
    if base_count == 1:
        return np.array([1e-6])
    return np.logspace(-6, -2, base_count)


def _design_matrix(batch: WindowBatch, stats: NormalizerStats,
                   idx: Optional[np.ndarray] = None) -> np.ndarray:
    feats = batch.features if idx is None else batch.features[idx]
    x = normalize_features(feats, stats).reshape(len(feats), -1)
    return np.hstack([x, np.ones((len(x), 1))])


def _ridge_fit(x: np.ndarray, y: np.ndarray, lam: float) -> np.ndarray:
    penalty = np.ones(x.shape[1])
    penalty[-1] = 0.0  # bias column unpenalized
    a = x.T @ x + lam * np.diag(penalty)
    cond = np.linalg.cond(a)
    if not np.isfinite(cond) or cond > 1e13:
        raise StackedRegressorError(
            f"degenerate design matrix (condition number {cond:.3e})")
    return np.linalg.solve(a, x.T @ y)


def _fit_stacked(spec, train_batch, cfg, stats, n_folds: int = 5,
                 lambdas=None):
    x = _design_matrix(train_batch, stats)
    n = len(train_batch)
    y = train_batch.target.reshape(n, -1)
    if lambdas is None:
        lambdas = _stacked_lambdas(spec.base_count)
    n_out = y.shape[1]

    if spec.base_count == 1:
        combiner = np.ones((1, n_out))
    else:
        # Out-of-fold base predictions keep the combiner honest.
        folds = np.array_split(np.random.default_rng(cfg.seed).permutation(n),
                               min(n_folds, n))
        oof = np.zeros((n, spec.base_count, n_out))
        for fold in folds:
            mask = np.ones(n, dtype=bool)
            mask[fold] = False
            for k, lam in enumerate(lambdas):
                w = _ridge_fit(x[mask], y[mask], lam)
                oof[fold, k, :] = x[fold] @ w
        combiner = np.empty((spec.base_count, n_out))
        for j in range(n_out):
            coef, *_ = np.linalg.lstsq(oof[:, :, j], y[:, j], rcond=None)
            combiner[:, j] = coef

    bases = np.stack([_ridge_fit(x, y, lam) for lam in lambdas])
    params: Params = {"bases": bases, "combiner": combiner}
    artifact = ModelArtifact(
        architecture=spec.variant, hidden=0, history_len=spec.history_len,
        horizon_len=spec.horizon_len, embedding_dim=None, params=params,
        normalizer=stats, config=_config_snapshot(spec, cfg))
    pred = _predict_stacked(artifact, x)
    train_loss = float(np.mean((pred.reshape(n, -1) - y) ** 2))
    artifact.history = [train_loss]
    artifact.validate()
    return artifact, [train_loss]


def _predict_stacked(artifact: ModelArtifact, x: np.ndarray) -> np.ndarray:
    bases = artifact.params["bases"]         # (K, P, n_out)
    combiner = artifact.params["combiner"]   # (K, n_out)
    base_preds = np.einsum("np,kpo->kno", x, bases)
    out = np.einsum("kno,ko->no", base_preds, combiner)
    return out.reshape(len(x), artifact.horizon_len, 2)


# ---------------------------------------------------------------------------
# Prediction


def predict_batch(artifact: ModelArtifact, batch: WindowBatch,
                  chunk: int = 512) -> np.ndarray:
    """Predictions (N, horizon, 2) for raw (unnormalized) windows."""
    spec = artifact.spec
    n = len(batch)
    if spec.variant == "stacked_lr":
        return _predict_stacked(artifact, _design_matrix(batch, artifact.normalizer))
    out = np.empty((n, spec.horizon_len, 2))
    for start in range(0, n, chunk):
        idx = np.arange(start, min(start + chunk, n))
        inputs = prepare_inputs(spec, batch, artifact.normalizer, idx)
        out[idx], _ = forward(spec, artifact.params, inputs)
    return out


def predict(artifact: ModelArtifact, window: WindowSample) -> np.ndarray:
    """Predictions (horizon, 2) for one already-normalized window."""
    spec = artifact.spec
    if spec.variant == "stacked_lr":
        x = np.hstack([window.features.reshape(1, -1), np.ones((1, 1))])
        return _predict_stacked(artifact, x)[0]
    inputs = {"feat": np.ascontiguousarray(
        window.features[:, None, :].astype(np.float64))}
    for view in spec.views:
        if window.embeddings is None or CameraView(view) not in window.embeddings:
            raise ConfigurationError(f"window lacks {view!r} embeddings")
        emb = window.embeddings[CameraView(view)]
        if spec.embedding_dim is not None and emb.shape[1] != spec.embedding_dim:
            raise ConfigurationError(
                f"embedding dimension {emb.shape[1]} does not match the "
                f"model's {spec.embedding_dim}")
        inputs[view] = np.ascontiguousarray(emb[:, None, :].astype(np.float64))
    pred, _ = forward(spec, artifact.params, inputs)
    return pred[0]


def zero_predictions(batch: WindowBatch) -> np.ndarray:
    """The zero predictor: always (0, 0)."""
    k = batch.target.shape[1]
    return np.zeros((len(batch), k, 2))


def persistence_predictions(batch: WindowBatch) -> np.ndarray:
    """Repeat the last observed smoothed acceleration across the horizon."""
    k = batch.target.shape[1]
    return np.repeat(batch.last_accel[:, None, :], k, axis=1)


# ---------------------------------------------------------------------------
# Artifact serialization


def save_artifact(artifact: ModelArtifact, path) -> None:
    artifact.validate()
    meta = {
        "kind": "model",
        "artifact_version": ARTIFACT_VERSION,
        "gate_order": GATE_ORDER,
        "architecture": artifact.architecture,
        "hidden": artifact.hidden,
        "history_len": artifact.history_len,
        "horizon_len": artifact.horizon_len,
        "embedding_dim": artifact.embedding_dim,
        "config": artifact.config,
        "history": artifact.history,
        "normalizer": {"mean": list(artifact.normalizer.mean),
                       "std": list(artifact.normalizer.std)},
    }
    write_container(path, meta, artifact.params)


def load_artifact(path) -> ModelArtifact:
    meta, tensors = read_container(path)
    if meta.get("kind") != "model":
        raise ValueError(f"{path}: not a model artifact")
    if meta.get("artifact_version") != ARTIFACT_VERSION:
        raise ValueError(f"{path}: unsupported artifact version")
    if meta.get("gate_order") != GATE_ORDER:
        raise ValueError(f"{path}: unexpected gate order {meta.get('gate_order')!r}")
    artifact = ModelArtifact(
        architecture=meta["architecture"], hidden=meta["hidden"],
        history_len=meta["history_len"], horizon_len=meta["horizon_len"],
        embedding_dim=meta["embedding_dim"], params=tensors,
        normalizer=NormalizerStats(np.array(meta["normalizer"]["mean"]),
                                   np.array(meta["normalizer"]["std"])),
        config=dict(meta["config"]), history=list(meta["history"]))
    artifact.validate()
    return artifact


# ---------------------------------------------------------------------------
# Gradient checking entry points


def tiny_spec(variant: str, hidden: int = 4, history: int = 3,
              horizon: int = 2, embedding_dim: int = 4) -> ArchitectureSpec:
    """Small instance of a variant, sized for finite-difference checks."""
    dim = embedding_dim if variant in ("lstm_front", "lstm_all") else None
    return ArchitectureSpec(variant=variant, hidden=hidden, embedding_dim=dim,
                            history_len=history, horizon_len=horizon)


def random_inputs(spec: ArchitectureSpec, n: int,
                  seed: int) -> tuple[dict[str, np.ndarray], np.ndarray]:
    """Random (inputs, target) pair shaped for a spec; for tests and checks."""
    rng = np.random.default_rng(seed)
    inputs = {"feat": rng.normal(size=(spec.history_len, n, NUM_FEATURES))}
    for view in spec.views:
        inputs[view] = rng.normal(size=(spec.history_len, n, spec.embedding_dim))
    target = rng.normal(size=(n, spec.horizon_len, 2))
    return inputs, target


def grad_check_variant(variant: str, eps: float = 1e-5, tol: float = 1e-4,
                       seed: int = 0, n: int = 3) -> GradCheckReport:
    """Finite-difference check of one architecture at toy size."""
    spec = tiny_spec(variant)
    params = init_params(spec, seed)
    inputs, target = random_inputs(spec, n, seed + 1)

    def loss_fn(p: Params) -> float:
        pred, _ = forward(spec, p, inputs)
        return loss(pred, target, "mse")

    _, grads = loss_and_grads(spec, params, inputs, target, "mse")
    return grad_check(loss_fn, params, grads, eps=eps, tol=tol)

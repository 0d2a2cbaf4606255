import numpy as np
import pytest

from drivebc import models
from drivebc.archive import WindowBatch, stack_windows
from drivebc.data import CameraView, WindowSample
from drivebc.features import (NormalizerStats, PipelineConfig,
                              build_all_windows, fit_normalizer)
from drivebc.models import (ArchitectureSpec, ConfigurationError, TrainConfig,
                            init_params, load_artifact, parameter_count,
                            persistence_predictions, predict, predict_batch,
                            save_artifact, train, zero_predictions)
from drivebc.simulate import ScenarioConfig, attach_embeddings, generate_segment


def tiny_corpus(n_segments=4, duration=3.0, embedding_dim=0, base_seed=100):
    segs = []
    for i in range(n_segments):
        cfg = ScenarioConfig(seed=base_seed + i, duration_s=duration,
                             embedding_dim=embedding_dim)
        seg = generate_segment(cfg)
        if embedding_dim:
            seg = attach_embeddings(seg, cfg)
        segs.append(seg)
    pcfg = PipelineConfig()
    half = n_segments // 2
    train_b = stack_windows(build_all_windows(segs[:half], pcfg))
    val_b = stack_windows(build_all_windows(segs[half:], pcfg))
    stats = fit_normalizer(build_all_windows(segs[:half], pcfg))
    return train_b, val_b, stats


class TestBaseline:
    def test_parameter_count(self):
        params = init_params(ArchitectureSpec("baseline_nn", hidden=0), 0)
        assert parameter_count(params) == 150

    def test_zero_weights_zero_prediction(self):
        spec = ArchitectureSpec("baseline_nn", hidden=0)
        params = {k: np.zeros_like(v) for k, v in init_params(spec, 0).items()}
        inputs, _ = models.random_inputs(spec, 4, 0)
        pred, _ = models.forward(spec, params, inputs)
        assert pred.shape == (4, 5, 2)
        assert np.all(pred == 0.0)

    def test_constant_across_horizon(self):
        spec = ArchitectureSpec("baseline_nn", hidden=0)
        params = init_params(spec, 1)
        inputs, _ = models.random_inputs(spec, 3, 1)
        pred, _ = models.forward(spec, params, inputs)
        for k in range(1, 5):
            assert np.array_equal(pred[:, k, :], pred[:, 0, :])

    def test_gradients(self):
        spec = ArchitectureSpec("baseline_nn", hidden=0, history_len=3,
                                horizon_len=2)
        params = init_params(spec, 2)
        inputs, target = models.random_inputs(spec, 4, 3)

        def loss_fn(p):
            pred, _ = models.forward(spec, p, inputs)
            return models.loss(pred, target, "mse")

        from drivebc.nn import grad_check
        _, grads = models.loss_and_grads(spec, params, inputs, target, "mse")
        assert grad_check(loss_fn, params, grads, tol=1e-6).passed


def linear_batch(n=400, seed=0, horizon=5):
    """Targets are an exact linear map of the flattened window features."""
    rng = np.random.default_rng(seed)
    feats = rng.normal(size=(n, 10, 12))
    w_true = rng.normal(size=(120, horizon * 2)) * 0.1
    targets = (feats.reshape(n, -1) @ w_true).reshape(n, horizon, 2)
    n_segs = 8
    return WindowBatch(
        features=feats, target=targets, raw_target=targets.copy(),
        last_accel=targets[:, 0, :].copy(),
        segment_ids=[f"s{i}" for i in range(n_segs)],
        segment_index=np.arange(n, dtype=np.int64) % n_segs,
        start_index=np.zeros(n, dtype=np.int64))


class TestStacked:
    def test_exactly_linear_data(self):
        batch = linear_batch()
        stats = NormalizerStats(np.zeros(12), np.ones(12))
        spec = ArchitectureSpec("stacked_lr", hidden=0)
        artifact, _ = models._fit_stacked(spec, batch, TrainConfig(epochs=1), stats)
        test = linear_batch(seed=0)  # same generator: same linear law
        preds = predict_batch(artifact, test)
        assert np.abs(preds - test.target).mean() < 1e-6

    def test_single_base_reduces_to_ridge(self):
        batch = linear_batch(n=200, seed=1)
        stats = NormalizerStats(np.zeros(12), np.ones(12))
        spec1 = ArchitectureSpec("stacked_lr", hidden=0, base_count=1)
        artifact, _ = models._fit_stacked(spec1, batch, TrainConfig(epochs=1),
                                          stats, lambdas=[1e-3])
        assert np.array_equal(artifact.params["combiner"], np.ones((1, 10)))
        x = models._design_matrix(batch, stats)
        w = models._ridge_fit(x, batch.target.reshape(len(batch), -1), 1e-3)
        direct = (x @ w).reshape(len(batch), 5, 2)
        assert np.abs(predict_batch(artifact, batch) - direct).max() < 1e-12

    def test_duplicated_bases_split_weight(self):
        batch = linear_batch(n=200, seed=2)
        stats = NormalizerStats(np.zeros(12), np.ones(12))
        single = models._fit_stacked(
            ArchitectureSpec("stacked_lr", hidden=0, base_count=1), batch,
            TrainConfig(epochs=1), stats, lambdas=[1e-3])[0]
        doubled = models._fit_stacked(
            ArchitectureSpec("stacked_lr", hidden=0, base_count=2), batch,
            TrainConfig(epochs=1), stats, lambdas=[1e-3, 1e-3])[0]
        # identical bases: the min-norm combiner splits the weight evenly and
        # the combined predictions match the single-base fit
        combiner = doubled.params["combiner"]
        assert np.allclose(combiner[0], combiner[1], atol=1e-9)
        assert np.allclose(combiner.sum(axis=0), 1.0, atol=1e-3)
        assert np.allclose(predict_batch(doubled, batch),
                           predict_batch(single, batch), atol=1e-3)

    def test_degenerate_design_matrix_raises(self):
        batch = linear_batch(n=50, seed=3)
        batch.features[:] = 1.0  # rank-1 design
        stats = NormalizerStats(np.zeros(12), np.ones(12))
        with pytest.raises(models.StackedRegressorError, match="condition"):
            models._fit_stacked(ArchitectureSpec("stacked_lr", hidden=0), batch,
                                TrainConfig(epochs=1), stats, lambdas=[0.0])


class TestLstmVariants:
    def test_lstm12_shapes(self):
        spec = ArchitectureSpec("lstm_12")
        params = init_params(spec, 0)
        inputs, _ = models.random_inputs(spec, 3, 0)
        pred, _ = models.forward(spec, params, inputs)
        assert pred.shape == (3, 5, 2)

    def test_lstm_front_shapes(self):
        spec = ArchitectureSpec("lstm_front", embedding_dim=16)
        params = init_params(spec, 0)
        inputs, _ = models.random_inputs(spec, 2, 0)
        pred, _ = models.forward(spec, params, inputs)
        assert pred.shape == (2, 5, 2)

    def test_lstm_all_parameter_arithmetic(self):
        h, d = 128, 16
        front = parameter_count(init_params(
            ArchitectureSpec("lstm_front", hidden=h, embedding_dim=d), 0))
        full = parameter_count(init_params(
            ArchitectureSpec("lstm_all", hidden=h, embedding_dim=d), 0))
        enc_block = d * 4 * h + h * 4 * h + 4 * h
        proj_front = (2 * h * 2) * (2 * h) + 2 * h
        proj_all = (2 * h * 6) * (2 * h) + 2 * h
        assert full - front == 4 * enc_block + (proj_all - proj_front)

    def test_embedding_variant_requires_dim(self):
        with pytest.raises(ConfigurationError):
            ArchitectureSpec("lstm_front")

    def test_missing_embeddings_rejected_at_training(self):
        train_b, val_b, stats = tiny_corpus()
        spec = ArchitectureSpec("lstm_front", hidden=8, embedding_dim=4)
        with pytest.raises(ConfigurationError, match="embeddings"):
            train(spec, train_b, val_b, TrainConfig(epochs=1), stats)

    def test_unknown_variant(self):
        with pytest.raises(ConfigurationError):
            ArchitectureSpec("lstm_deep")


class TestTraining:
    def test_loss_decreases_and_is_deterministic(self):
        train_b, val_b, stats = tiny_corpus()
        spec = ArchitectureSpec("lstm_12", hidden=16)
        cfg = TrainConfig(epochs=5, batch_size=32, seed=3)
        run1 = train(spec, train_b, val_b, cfg, stats)
        run2 = train(spec, train_b, val_b, cfg, stats)
        assert run1.history == run2.history
        assert run1.history[-1] <= run1.history[0]
        for name, p in run1.artifact.params.items():
            assert np.array_equal(p, run2.artifact.params[name])

    def test_disjointness_enforced(self):
        train_b, _, stats = tiny_corpus()
        with pytest.raises(ConfigurationError, match="share segments"):
            train(ArchitectureSpec("lstm_12", hidden=8), train_b, train_b,
                  TrainConfig(epochs=1), stats)

    def test_missing_normalizer_rejected(self):
        train_b, val_b, _ = tiny_corpus()
        with pytest.raises(ConfigurationError, match="normalizer"):
            train(ArchitectureSpec("lstm_12", hidden=8), train_b, val_b,
                  TrainConfig(epochs=1))

    def test_history_length_equals_epochs(self):
        train_b, val_b, stats = tiny_corpus()
        run = train(ArchitectureSpec("lstm_12", hidden=8), train_b, val_b,
                    TrainConfig(epochs=3), stats)
        assert len(run.history) == 3
        assert run.artifact.history == run.history


class TestPredict:
    def test_artifact_round_trip_bit_exact(self, tmp_path):
        train_b, val_b, stats = tiny_corpus()
        run = train(ArchitectureSpec("lstm_12", hidden=8), train_b, val_b,
                    TrainConfig(epochs=2), stats)
        path = tmp_path / "model.dbc"
        save_artifact(run.artifact, path)
        loaded = load_artifact(path)
        p1 = predict_batch(run.artifact, val_b)
        p2 = predict_batch(loaded, val_b)
        assert np.array_equal(p1, p2)

    def test_zero_window_untrained_head_bias(self):
        spec = ArchitectureSpec("lstm_12", hidden=8)
        params = {k: np.zeros_like(v) for k, v in init_params(spec, 0).items()}
        params["head.b"] = np.array([0.25, -0.5])
        artifact = models.ModelArtifact(
            architecture="lstm_12", hidden=8, history_len=10, horizon_len=5,
            embedding_dim=None, params=params,
            normalizer=NormalizerStats(np.zeros(12), np.ones(12)), config={})
        window = WindowSample(features=np.zeros((10, 12)),
                              target=np.zeros((5, 2)), segment_id="s", start_index=0)
        pred = predict(artifact, window)
        assert pred.shape == (5, 2)
        assert np.allclose(pred, np.array([0.25, -0.5]))

    def test_prediction_shapes_all_variants(self):
        train_b, val_b, stats = tiny_corpus(embedding_dim=4)
        for variant in ("baseline_nn", "stacked_lr", "lstm_12", "lstm_front",
                        "lstm_all"):
            spec = ArchitectureSpec(variant, hidden=8 if "lstm" in variant else 0,
                                    embedding_dim=4 if variant.startswith("lstm_") and variant != "lstm_12" else None)
            run = train(spec, train_b, val_b, TrainConfig(epochs=1), stats)
            preds = predict_batch(run.artifact, val_b)
            assert preds.shape == (len(val_b), 5, 2)
            assert np.all(np.isfinite(preds))

    def test_embedding_dim_mismatch_rejected(self):
        train_b, val_b, stats = tiny_corpus(embedding_dim=4)
        spec = ArchitectureSpec("lstm_front", hidden=8, embedding_dim=6)
        with pytest.raises(ConfigurationError, match="dimension"):
            train(spec, train_b, val_b, TrainConfig(epochs=1), stats)

    def test_predict_single_window_matches_batch(self):
        train_b, val_b, stats = tiny_corpus(embedding_dim=4)
        run = train(ArchitectureSpec("lstm_front", hidden=8, embedding_dim=4),
                    train_b, val_b, TrainConfig(epochs=1), stats)
        preds = predict_batch(run.artifact, val_b)
        norm_feat = (val_b.features[0] - stats.mean) / stats.std
        window = WindowSample(
            features=norm_feat, target=val_b.target[0], segment_id="x",
            start_index=0,
            embeddings={CameraView.FRONT: val_b.embeddings["front"][0]})
        single = predict(run.artifact, window)
        assert np.abs(single - preds[0]).max() < 1e-12


class TestReferencePredictors:
    def test_zero_predictions(self):
        train_b, _, _ = tiny_corpus()
        assert np.all(zero_predictions(train_b) == 0.0)

    def test_persistence_repeats_last_accel(self):
        train_b, _, _ = tiny_corpus()
        preds = persistence_predictions(train_b)
        for k in range(5):
            assert np.array_equal(preds[:, k, :], train_b.last_accel)


class TestArtifactValidation:
    def test_non_finite_parameters_rejected(self):
        spec = ArchitectureSpec("lstm_12", hidden=4)
        params = init_params(spec, 0)
        params["head.b"] = np.array([np.nan, 0.0])
        artifact = models.ModelArtifact(
            architecture="lstm_12", hidden=4, history_len=10, horizon_len=5,
            embedding_dim=None, params=params,
            normalizer=NormalizerStats(np.zeros(12), np.ones(12)), config={})
        with pytest.raises(ValueError, match="finite"):
            artifact.validate()

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "junk.dbc"
        path.write_bytes(b"garbage!" * 4)
        from drivebc.archive import ContainerError
        with pytest.raises(ContainerError):
            load_artifact(path)

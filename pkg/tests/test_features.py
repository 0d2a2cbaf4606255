import numpy as np
import pytest

from drivebc.data import Frame, ObjectType, Pose, Segment, TrackedObject, ValidationError
from drivebc.features import (NormalizerStats, PipelineConfig, apply_normalizer,
                              build_all_windows, build_windows,
                              compute_accelerations, extract_features,
                              fit_normalizer, moving_average,
                              smooth_accelerations)
from drivebc.simulate import ScenarioConfig, generate_segment, simulate_trace


def velocity_segment(velocities, dt=0.1, seg_id="s0"):
    frames = [Frame(segment_id=seg_id, t_index=i, timestamp_s=i * dt,
                    pose=Pose.identity(), ego_velocity_g=np.asarray(v, dtype=float))
              for i, v in enumerate(velocities)]
    return Segment(seg_id, frames, nominal_dt=dt)


class TestAccelerations:
    def test_constant_velocity_zero_accel(self):
        seg = compute_accelerations(velocity_segment([[5, 0, 0]] * 20))
        for f in seg.frames:
            assert np.abs(f.ego_accel_g).max() == 0.0

    def test_backward_difference(self):
        seg = compute_accelerations(velocity_segment([[1, 0, 0], [2, 0, 0]]))
        assert np.allclose(seg.frames[1].ego_accel_g, [10.0, 0.0, 0.0])

    def test_first_frame_zero(self):
        seg = compute_accelerations(velocity_segment([[3, 1, 0]]))
        assert np.all(seg.frames[0].ego_accel_g == 0.0)

    def test_non_increasing_timestamps_rejected(self):
        frames = [Frame("s0", 0, 0.0, Pose.identity(), np.zeros(3)),
                  Frame("s0", 1, 0.0, Pose.identity(), np.zeros(3))]
        with pytest.raises(ValidationError):
            compute_accelerations(Segment("s0", frames))

    def test_velocity_reconstruction_round_trip(self):
        # cumulative sum of a_t * dt recovers the velocities exactly
        cfg = ScenarioConfig(seed=5)
        seg = compute_accelerations(generate_segment(cfg))
        v = np.array([f.ego_velocity_g for f in seg.frames])
        a = np.array([f.ego_accel_g for f in seg.frames])
        ts = np.array([f.timestamp_s for f in seg.frames])
        recon = v[0] + np.cumsum(a[1:] * np.diff(ts)[:, None], axis=0)
        assert np.abs(recon - v[1:]).max() < 1e-9


class TestSmoothing:
    def test_window_one_is_identity(self):
        series = np.array([[0.0], [3.0], [0.0], [7.0]])
        assert np.array_equal(moving_average(series, 1), series)

    def test_truncated_window_average(self):
        out = moving_average(np.array([0.0, 3.0, 0.0]), 3)
        assert np.allclose(out, [1.5, 1.0, 1.5])

    def test_constant_series_fixed_point(self):
        series = np.full(11, 2.5)
        assert np.allclose(moving_average(series, 5), series)

    def test_even_window_rejected(self):
        with pytest.raises(ValueError):
            moving_average(np.zeros(5), 4)
        with pytest.raises(ValueError):
            PipelineConfig(smooth_window=4)

    def test_smooth_requires_accels(self):
        seg = velocity_segment([[1, 0, 0]] * 5)
        with pytest.raises(ValueError):
            smooth_accelerations(seg, 3)


def leader_label(cx, velocity=(7.0, 0.0, 0.0), accel=(0.0, 0.0, 0.0)):
    return TrackedObject("lead", ObjectType.VEHICLE, np.array([cx, 0.0, 0.0]),
                         np.array([4.0, 2.0, 1.5]), 0.0,
                         np.array(velocity),
                         None if accel is None else np.array(accel))


class TestFeatures:
    def test_empty_scene_zero_fills(self):
        frame = Frame("s0", 0, 0.0, Pose.identity(), np.array([8.0, 0.0, 0.0]))
        feat = extract_features(frame, PipelineConfig())
        assert np.allclose(feat, [8, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0])

    def test_front_vehicle_populates_block(self):
        frame = Frame("s0", 0, 0.0, Pose.identity(), np.array([8.0, 0.0, 0.0]),
                      labels=(leader_label(10.0),))
        feat = extract_features(frame, PipelineConfig())
        assert np.allclose(feat, [8, 0, 0, 7, 0, 0, 0, 0, 0, 10, 0, 1])

    def test_accel_fallback_differences_velocities(self):
        prev = Frame("s0", 0, 0.0, Pose.identity(), np.array([8.0, 0.0, 0.0]),
                     labels=(leader_label(10.0, velocity=(6.0, 0, 0), accel=None),))
        cur = Frame("s0", 1, 0.1, Pose.identity(), np.array([8.0, 0.0, 0.0]),
                    labels=(leader_label(10.0, velocity=(7.0, 0, 0), accel=None),))
        feat = extract_features(cur, PipelineConfig(), prev_frame=prev)
        assert np.allclose(feat[6:9], [10.0, 0.0, 0.0])

    def test_front_block_atomicity(self):
        # entries 3..10 are all zero or all populated together
        rng = np.random.default_rng(0)
        cfg = PipelineConfig()
        for _ in range(300):
            labels = ()
            if rng.random() < 0.7:
                labels = (leader_label(rng.uniform(-20, 120),
                                       velocity=tuple(rng.normal(size=3)),
                                       accel=tuple(rng.normal(size=3))),)
            frame = Frame("s0", 0, 0.0, Pose.identity(),
                          rng.normal(size=3), labels=labels)
            feat = extract_features(frame, cfg)
            assert len(feat) == 12 and np.all(np.isfinite(feat))
            block = feat[3:11]
            if feat[9] == 0:
                assert np.all(block == 0.0)

    def test_feature_length_on_generated_frames(self):
        seg = generate_segment(ScenarioConfig(seed=1, duration_s=5.0))
        cfg = PipelineConfig()
        prev = None
        for frame in seg.frames:
            assert extract_features(frame, cfg, prev).shape == (12,)
            prev = frame


class TestWindows:
    def test_window_counts(self):
        cfg = PipelineConfig()
        seg200 = generate_segment(ScenarioConfig(seed=2))
        assert len(build_windows(seg200, cfg)) == 186
        seg15 = velocity_segment([[1, 0, 0]] * 15)
        assert len(build_windows(seg15, cfg)) == 1
        seg14 = velocity_segment([[1, 0, 0]] * 14)
        assert build_windows(seg14, cfg) == []

    def test_stride(self):
        seg = generate_segment(ScenarioConfig(seed=2))
        assert len(build_windows(seg, PipelineConfig(stride=2))) == 93

    def test_targets_are_smoothed_horizon_rows(self):
        seg = generate_segment(ScenarioConfig(seed=3, duration_s=4.0))
        cfg = PipelineConfig()
        smooth = smooth_accelerations(compute_accelerations(seg), cfg.smooth_window)
        raw = compute_accelerations(seg)
        windows = build_windows(seg, cfg)
        for w in windows[:5]:
            for k in range(cfg.horizon_len):
                idx = w.start_index + cfg.history_len + k
                assert np.allclose(w.target[k], smooth.frames[idx].ego_accel_g[:2])
                assert np.allclose(w.raw_target[k], raw.frames[idx].ego_accel_g[:2])
            last = w.start_index + cfg.history_len - 1
            assert np.allclose(w.last_accel, smooth.frames[last].ego_accel_g[:2])

    def test_windows_never_cross_segments(self):
        segs = [generate_segment(ScenarioConfig(seed=s, duration_s=3.0))
                for s in (1, 2)]
        windows = build_all_windows(segs, PipelineConfig())
        for w in windows:
            assert w.segment_id in ("synth-000001", "synth-000002")
            assert w.start_index + 15 <= 30

    def test_embeddings_sliced_per_view(self):
        from drivebc.simulate import attach_embeddings
        cfg = ScenarioConfig(seed=4, duration_s=3.0, embedding_dim=6)
        seg = attach_embeddings(generate_segment(cfg), cfg)
        windows = build_windows(seg, PipelineConfig())
        for w in windows:
            assert len(w.embeddings) == 5
            for emb in w.embeddings.values():
                assert emb.shape == (10, 6)


class TestNormalizer:
    def test_all_zero_features_floor(self):
        samples = build_windows(velocity_segment([[0, 0, 0]] * 20), PipelineConfig())
        stats = fit_normalizer(samples)
        assert np.allclose(stats.mean, 0.0)
        assert np.allclose(stats.std, 1e-6)

    def test_two_value_population_std(self):
        seg0 = velocity_segment([[0, 0, 0]] * 15, seg_id="a")
        seg2 = velocity_segment([[2, 0, 0]] * 15, seg_id="b")
        stats = fit_normalizer(build_all_windows([seg0, seg2], PipelineConfig()))
        assert np.isclose(stats.mean[0], 1.0)
        assert np.isclose(stats.std[0], 1.0)  # population convention

    def test_normalized_training_mean_is_zero(self):
        samples = build_windows(generate_segment(ScenarioConfig(seed=6)),
                                PipelineConfig())
        stats = fit_normalizer(samples)
        rows = np.concatenate([apply_normalizer(s, stats).features
                               for s in samples])
        assert np.abs(rows.mean(axis=0)).max() < 1e-9

    def test_identity_stats(self):
        samples = build_windows(generate_segment(ScenarioConfig(seed=7, duration_s=3.0)),
                                PipelineConfig())
        stats = NormalizerStats(mean=np.zeros(12), std=np.ones(12))
        out = apply_normalizer(samples[0], stats)
        assert np.array_equal(out.features, samples[0].features)

    def test_value_at_mean_maps_to_zero(self):
        stats = NormalizerStats(mean=np.full(12, 3.0), std=np.full(12, 2.0))
        sample = build_windows(velocity_segment([[3, 3, 3]] * 20),
                               PipelineConfig())[0]
        # only velocity entries equal the mean; check those
        out = apply_normalizer(sample, stats)
        assert np.allclose(out.features[:, :3], 0.0)

    def test_round_trip(self):
        samples = build_windows(generate_segment(ScenarioConfig(seed=8, duration_s=3.0)),
                                PipelineConfig())
        stats = fit_normalizer(samples)
        out = apply_normalizer(samples[0], stats)
        back = out.features * stats.std + stats.mean
        assert np.abs(back - samples[0].features).max() < 1e-9

    def test_empty_training_set_rejected(self):
        with pytest.raises(ValueError):
            fit_normalizer([])

    def test_targets_and_embeddings_untouched(self):
        from drivebc.simulate import attach_embeddings
        cfg = ScenarioConfig(seed=9, duration_s=3.0, embedding_dim=4)
        seg = attach_embeddings(generate_segment(cfg), cfg)
        samples = build_windows(seg, PipelineConfig())
        stats = fit_normalizer(samples)
        out = apply_normalizer(samples[0], stats)
        assert np.array_equal(out.target, samples[0].target)
        for view in samples[0].embeddings:
            assert np.array_equal(out.embeddings[view],
                                  samples[0].embeddings[view])


def test_generated_accels_match_trace():
    cfg = ScenarioConfig(seed=10)
    trace = simulate_trace(cfg)
    seg = compute_accelerations(generate_segment(cfg))
    got = np.array([f.ego_accel_g for f in seg.frames])
    assert np.abs(got - trace.ego_accel).max() < 1e-6

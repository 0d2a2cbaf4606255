"""Segment preprocessing: accelerations, smoothing, features, windows.

Raw segments carry only poses and velocities. This module derives ego
accelerations by backward differencing (zero at the first frame), optionally
smooths them with a centered moving average, extracts the 12-entry feature
vector per frame, and slices overlapping history/horizon windows for
training. Feature normalization statistics are fit on the training split
only and applied row-wise.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .data import (HISTORY_LEN, HORIZON_LEN, NUM_FEATURES, CameraView, Frame,
                   Segment, ValidationError, WindowSample)
from .geometry import (DetectionConfig, count_corridor_vehicles,
                       detect_front_vehicle, rotate_to_global)


@dataclass(frozen=True)
class PipelineConfig:
    """Windowing and preprocessing knobs."""

    history_len: int = HISTORY_LEN
    horizon_len: int = HORIZON_LEN
    stride: int = 1
    smooth_window: int = 5          # centered moving average width, odd
    detection: DetectionConfig = field(default_factory=DetectionConfig)

    def __post_init__(self):
        if self.history_len < 1 or self.horizon_len < 1 or self.stride < 1:
            raise ValueError("history_len, horizon_len and stride must be >= 1")
        if self.smooth_window < 1 or self.smooth_window % 2 == 0:
            raise ValueError("smooth_window must be an odd integer >= 1")


@dataclass(frozen=True, eq=False)
class NormalizerStats:
    """Per-feature mean and standard deviation from the training split."""

    mean: np.ndarray  # (12,)
    std: np.ndarray   # (12,), floored at 1e-6

    def __post_init__(self):
        object.__setattr__(self, "mean", np.asarray(self.mean, dtype=np.float64).reshape(-1))
        object.__setattr__(self, "std", np.asarray(self.std, dtype=np.float64).reshape(-1))
        if np.any(self.std <= 0):
            raise ValueError("std must be positive")


def compute_accelerations(segment: Segment) -> Segment:
    """Fill ego_accel_g by backward-differencing velocities.

    The first frame's acceleration is zero; afterwards
    ``a_t = (v_t - v_(t-1)) / (ts_t - ts_(t-1))``.
    """
    frames = segment.frames
    out = [frames[0].with_accel(np.zeros(3))]
    for prev, cur in zip(frames, frames[1:]):
        dt = cur.timestamp_s - prev.timestamp_s
        if dt <= 0:
            raise ValidationError(segment.segment_id, "timestamp_s",
                                  "timestamps must strictly increase")
        out.append(cur.with_accel((cur.ego_velocity_g - prev.ego_velocity_g) / dt))
    return Segment(segment.segment_id, out, segment.nominal_dt)


def moving_average(values: np.ndarray, window: int) -> np.ndarray:
    """Centered moving average; the window truncates at the boundaries."""
    if window < 1 or window % 2 == 0:
        raise ValueError("window must be an odd integer >= 1")
    if window == 1:
        return np.array(values, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    half = window // 2
    n = len(values)
    out = np.empty_like(values)
    for i in range(n):
        lo = max(0, i - half)
        hi = min(n, i + half + 1)
        out[i] = values[lo:hi].mean(axis=0)
    return out


def smooth_accelerations(segment: Segment, window: int) -> Segment:
    """Apply a centered moving average to ego_accel_g, componentwise."""
    accels = np.array([f.ego_accel_g for f in segment.frames])
    if accels.dtype == object or segment.frames[0].ego_accel_g is None:
        raise ValueError("accelerations must be computed before smoothing")
    smoothed = moving_average(accels, window)
    frames = [f.with_accel(a) for f, a in zip(segment.frames, smoothed)]
    return Segment(segment.segment_id, frames, segment.nominal_dt)


def extract_features(frame: Frame, cfg: PipelineConfig,
                     prev_frame: Optional[Frame] = None) -> np.ndarray:
    """Build the 12-entry feature vector for one frame.

    Entries 0-2 are the ego velocity in the global frame. Entries 3-10 are
    the front-car block (velocity, acceleration, displacement); they are all
    zero when no front vehicle is detected. When the front car carries no
    acceleration label, it is differenced from the previous frame's velocity
    of the same object (zero if that frame does not show it). The last entry
    counts vehicles in the detection corridor.
    """
    feat = np.zeros(NUM_FEATURES)
    feat[0:3] = frame.ego_velocity_g
    info = detect_front_vehicle(frame, cfg.detection)
    if info is not None:
        feat[3:6] = info.velocity_g
        if info.accel_g is not None:
            feat[6:9] = info.accel_g
        elif prev_frame is not None:
            prev = next((o for o in prev_frame.labels if o.obj_id == info.obj_id), None)
            if prev is not None:
                v_prev = rotate_to_global(prev.velocity_v, prev_frame.pose)
                dt = frame.timestamp_s - prev_frame.timestamp_s
                feat[6:9] = (info.velocity_g - v_prev) / dt
        feat[9] = info.dx
        feat[10] = info.dy
    feat[11] = count_corridor_vehicles(frame, cfg.detection)
    return feat


def segment_features(segment: Segment, cfg: PipelineConfig) -> np.ndarray:
    """Feature matrix (n_frames, 12) for a whole segment."""
    rows = []
    prev = None
    for frame in segment.frames:
        rows.append(extract_features(frame, cfg, prev_frame=prev))
        prev = frame
    return np.array(rows)


def build_windows(segment: Segment, cfg: PipelineConfig) -> list[WindowSample]:
    """Slice a segment into overlapping history/horizon windows.

    Accelerations are derived here: targets take the smoothed (a_x, a_y) of
    the horizon frames, raw_target keeps the unsmoothed values, and
    last_accel the smoothed value at the final history frame. Segments
    shorter than history + horizon yield no windows.
    """
    n = len(segment)
    total = cfg.history_len + cfg.horizon_len
    if n < total:
        return []

    raw = compute_accelerations(segment)
    smooth = smooth_accelerations(raw, cfg.smooth_window)
    feats = segment_features(segment, cfg)
    raw_xy = np.array([f.ego_accel_g[:2] for f in raw.frames])
    smooth_xy = np.array([f.ego_accel_g[:2] for f in smooth.frames])
    views = segment.embedding_views
    emb_all = {v: np.array([f.embeddings[v] for f in segment.frames]) for v in views}

    samples = []
    for s in range(0, n - total + 1, cfg.stride):
        h_end = s + cfg.history_len
        t_end = h_end + cfg.horizon_len
        emb = None
        if views:
            emb = {v: emb_all[v][s:h_end] for v in views}
        samples.append(WindowSample(
            features=feats[s:h_end],
            target=smooth_xy[h_end:t_end],
            segment_id=segment.segment_id,
            start_index=s,
            embeddings=emb,
            raw_target=raw_xy[h_end:t_end],
            last_accel=smooth_xy[h_end - 1],
        ))
    return samples


def build_all_windows(segments: Sequence[Segment], cfg: PipelineConfig) -> list[WindowSample]:
    """Windows for every segment, never mixing frames across segments."""
    out: list[WindowSample] = []
    for seg in segments:
        out.extend(build_windows(seg, cfg))
    return out


def fit_normalizer(samples: Sequence[WindowSample]) -> NormalizerStats:
    """Per-feature mean/std over all history rows of the training samples.

    Uses the population convention (ddof=0); std is floored at 1e-6 so
    constant features stay finite under normalization.
    """
    if not samples:
        raise ValueError("cannot fit a normalizer on an empty training set")
    rows = np.concatenate([s.features for s in samples], axis=0)
    mean = rows.mean(axis=0)
    std = np.maximum(rows.std(axis=0), 1e-6)
    return NormalizerStats(mean=mean, std=std)


def apply_normalizer(sample: WindowSample, stats: NormalizerStats) -> WindowSample:
    """Normalize a sample's features row-wise; targets and embeddings pass through."""
    return WindowSample(
        features=(sample.features - stats.mean) / stats.std,
        target=sample.target,
        segment_id=sample.segment_id,
        start_index=sample.start_index,
        embeddings=sample.embeddings,
        raw_target=sample.raw_target,
        last_accel=sample.last_accel,
    )


def normalize_features(features: np.ndarray, stats: NormalizerStats) -> np.ndarray:
    """Vectorized form of apply_normalizer for stacked feature arrays."""
    return (features - stats.mean) / stats.std

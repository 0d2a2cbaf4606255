"""Synthetic car-following segments: an IDM follower behind a scripted leader.

Stands in for a real driving corpus at desk scale. The follower obeys the
Intelligent Driver Model; the leader runs a configurable speed profile
(constant, sinusoidal, or randomized brake episodes). Segments are fully
deterministic in the seed. Pseudo camera embeddings are seeded random
projections of latent scene variables; the front view additionally carries a
brake-intent flag raised five frames before each braking episode starts, so
the camera channel holds information the 12 numeric features cannot provide.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .data import CameraView, Frame, ObjectType, Segment, TrackedObject, save_segments
from .geometry import rotate_to_vehicle, to_vehicle, yaw_pose

LEADER_DIMS = (4.5, 2.0, 1.6)  # length, width, height, meters
INTENT_LEAD_FRAMES = 5         # intent flag precedes braking by this many frames


class GenerationError(RuntimeError):
    """Scenario parameters produced an invalid trajectory (e.g. a collision)."""


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything that determines one synthetic segment."""

    seed: int = 0
    duration_s: float = 20.0
    rate_hz: float = 10.0
    leader_profile: str = "random_brake"   # constant | sinusoidal | random_brake

    # IDM follower parameters
    desired_speed: float = 15.0      # m/s
    time_headway: float = 1.3        # s
    max_accel: float = 1.5           # m/s^2
    comfort_decel: float = 1.6       # m/s^2
    jam_distance: float = 2.0        # m

    leader_speed: float = 12.0       # m/s cruise speed
    lateral_amplitude: float = 0.25  # m of ego lateral wander
    embedding_dim: int = 0           # 0 disables embeddings
    embedding_seed: int = 7          # shared across a corpus so probes transfer

    # None draws these from the seed, giving corpus diversity.
    init_gap_factor: Optional[float] = None    # initial gap / equilibrium gap
    init_speed_factor: Optional[float] = None  # initial speed / leader speed
    speed_jitter: float = 0.1        # fractional per-seed jitter of speeds
    # Per-seed jitter of the IDM driver parameters (headway, accel limits),
    # so one corpus mixes driving styles; 0 freezes them at the configured
    # values.
    driver_jitter: float = 0.3
    # Stationary std (m/s) of AR(1) wobble added to the emitted ego
    # velocity; the derived accelerations inherit it, so targets are noisy
    # the way measured driving is. 0 disables.
    velocity_noise: float = 0.035

    def __post_init__(self):
        if self.duration_s <= 0 or self.rate_hz <= 0:
            raise ValueError("duration_s and rate_hz must be > 0")
        for name in ("desired_speed", "time_headway", "max_accel",
                     "comfort_decel", "jam_distance", "leader_speed"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        if self.leader_profile not in ("constant", "sinusoidal", "random_brake"):
            raise ValueError(f"unknown leader_profile {self.leader_profile!r}")
        if self.embedding_dim < 0:
            raise ValueError("embedding_dim must be >= 0")

    @property
    def n_frames(self) -> int:
        return int(round(self.duration_s * self.rate_hz))

    @property
    def dt(self) -> float:
        return 1.0 / self.rate_hz

    @property
    def segment_id(self) -> str:
        return f"synth-{self.seed:06d}"


@dataclass(frozen=True, eq=False)
class Trace:
    """Internal simulation state, one row per frame."""

    times: np.ndarray         # (n,)
    ego_pos: np.ndarray       # (n, 2) x, y
    ego_vel: np.ndarray       # (n, 3) global
    ego_accel: np.ndarray     # (n, 3) realized: (v_t - v_{t-1}) / dt, zero at t=0
    heading: np.ndarray       # (n,)
    leader_x: np.ndarray      # (n,)
    leader_speed: np.ndarray  # (n,)
    leader_accel: np.ndarray  # (n,) realized
    gap: np.ndarray           # (n,) bumper-to-bumper
    brake_active: np.ndarray  # (n,) bool
    intent: np.ndarray        # (n,) bool, on INTENT_LEAD_FRAMES before each episode


def idm_accel(v: float, v_lead: float, gap: float, v0: float, headway: float,
              a_max: float, b_comf: float, s0: float) -> float:
    """Intelligent Driver Model acceleration (exponent 4)."""
    dv = v - v_lead
    s_star = s0 + v * headway + v * dv / (2.0 * math.sqrt(a_max * b_comf))
    return a_max * (1.0 - (v / v0) ** 4 - (s_star / gap) ** 2)


def _equilibrium_gap(v: float, v0: float, headway: float, s0: float) -> float:
    if v >= v0:
        raise ValueError("no equilibrium at or above the desired speed")
    s_star = s0 + v * headway
    return s_star / math.sqrt(1.0 - (v / v0) ** 4)


def idm_equilibrium_gap(cfg: ScenarioConfig, v: float) -> float:
    """Gap at which the IDM follower holds speed v behind a steady leader."""
    return _equilibrium_gap(v, cfg.desired_speed, cfg.time_headway, cfg.jam_distance)


def _leader_schedule(cfg: ScenarioConfig, rng: np.random.Generator,
                     v0_lead: float) -> tuple[np.ndarray, np.ndarray]:
    """Leader speed trace and brake-active flags."""
    n = cfg.n_frames
    dt = cfg.dt
    speed = np.empty(n)
    braking = np.zeros(n, dtype=bool)
    if cfg.leader_profile == "constant":
        speed[:] = v0_lead
        return speed, braking
    if cfg.leader_profile == "sinusoidal":
        amp = 0.15 * v0_lead
        omega = 2.0 * math.pi / 8.0
        phase = rng.uniform(0.0, 2.0 * math.pi)
        t = np.arange(n) * dt
        speed = v0_lead + amp * np.sin(omega * t + phase)
        return speed, braking

    # random_brake: a smoothly modulated cruise speed with seeded brake
    # episodes on top. The two incommensurate modulation frequencies differ
    # per segment, so follower accelerations are not captured by one pooled
    # linear filter. Episodes are short and sparse so that the frames
    # carrying the pre-onset intent flag stay statistically
    # indistinguishable, in the 12 numeric features, from ordinary cruising.
    om1 = rng.uniform(0.4, 0.9)
    om2 = rng.uniform(1.2, 2.2)
    ph1 = rng.uniform(0.0, 2.0 * math.pi)
    ph2 = rng.uniform(0.0, 2.0 * math.pi)
    t_axis = np.arange(n) * dt
    target = v0_lead * (1.0 + 0.05 * np.sin(om1 * t_axis + ph1)
                        + 0.03 * np.sin(om2 * t_axis + ph2))
    # small AR(1) jitter keeps cruising frames from being perfectly
    # predictable, which would let fine slopes leak scheduling structure
    noise = np.empty(n)
    state = 0.0
    for t in range(n):
        state = 0.9 * state + rng.normal(0.0, 0.05)
        noise[t] = state
    target = target + noise
    p_onset = 0.014
    refractory = 8
    v = float(target[0])
    frames_left = 0
    cooldown = 10  # no onsets in the first second
    decel = 0.0
    for t in range(n):
        speed[t] = v
        if frames_left > 0:
            braking[t] = True
            v = max(v - decel * dt, 0.3 * v0_lead)
            frames_left -= 1
            cooldown = refractory
        else:
            if cooldown > 0:
                cooldown -= 1
            elif rng.random() < p_onset and t < n - 10:
                frames_left = int(rng.integers(4, 9))
                decel = rng.uniform(2.5, 4.0)
            v = v + 2.5 * (target[t] - v) * dt
    return speed, braking


def simulate_trace(cfg: ScenarioConfig) -> Trace:
    """Run the scenario; deterministic in cfg.seed.

    Raises GenerationError if the follower's gap ever closes to zero.
    """
    rng = np.random.default_rng(cfg.seed)
    n = cfg.n_frames
    dt = cfg.dt

    jit = cfg.speed_jitter
    v0_lead = cfg.leader_speed * (1.0 + rng.uniform(-jit, jit))
    v0_des = cfg.desired_speed * (1.0 + rng.uniform(-jit, jit))
    djit = cfg.driver_jitter
    headway = cfg.time_headway * (1.0 + rng.uniform(-djit, djit))
    a_max = cfg.max_accel * (1.0 + rng.uniform(-djit, djit))
    b_comf = cfg.comfort_decel * (1.0 + rng.uniform(-djit, djit))
    gap_factor = (cfg.init_gap_factor if cfg.init_gap_factor is not None
                  else rng.uniform(0.75, 1.35))
    speed_factor = (cfg.init_speed_factor if cfg.init_speed_factor is not None
                    else rng.uniform(0.9, 1.08))

    lead_speed, braking = _leader_schedule(cfg, rng, v0_lead)

    # Lateral wander follows a spatial path: two incommensurate seeded
    # sinusoids in road distance with per-segment wavelength and amplitude.
    # Lateral velocity is dy/dx * v_x, so lateral acceleration couples
    # quadratically to speed: predictable from history (and from anticipated
    # braking), but not by one pooled linear filter.
    wavelength = rng.uniform(55.0, 95.0)
    phase_y = rng.uniform(0.0, 2.0 * math.pi)
    phase_y2 = rng.uniform(0.0, 2.0 * math.pi)
    amp = cfg.lateral_amplitude * rng.uniform(0.3, 0.7)
    t_axis = np.arange(n) * dt

    v_follow = min(speed_factor * lead_speed[0], 0.98 * v0_des)
    gap0 = gap_factor * _equilibrium_gap(min(v_follow, 0.95 * v0_des), v0_des,
                                         headway, cfg.jam_distance)

    lead_x = np.empty(n)
    ego_x = np.empty(n)
    ego_vx = np.empty(n)
    gaps = np.empty(n)
    lead_x[0] = gap0 + LEADER_DIMS[0]
    ego_x[0] = 0.0
    ego_vx[0] = v_follow
    gaps[0] = gap0
    v = v_follow
    for t in range(n - 1):
        a = idm_accel(v, lead_speed[t], gaps[t], v0_des, headway,
                      a_max, b_comf, cfg.jam_distance)
        v = max(v + a * dt, 0.0)
        ego_vx[t + 1] = v
        ego_x[t + 1] = ego_x[t] + v * dt
        lead_x[t + 1] = lead_x[t] + lead_speed[t + 1] * dt
        gaps[t + 1] = lead_x[t + 1] - ego_x[t + 1] - LEADER_DIMS[0]
        if gaps[t + 1] <= 0:
            raise GenerationError(
                f"collision at frame {t + 1}: gap {gaps[t + 1]:.3f} m "
                f"(seed {cfg.seed})")

    k1 = 2.0 * math.pi / wavelength
    k2 = 2.7 * k1
    w1 = k1 * ego_x + phase_y
    w2 = k2 * ego_x + phase_y2
    y = amp * (np.sin(w1) + 0.35 * np.sin(w2))
    slope = amp * (k1 * np.cos(w1) + 0.35 * k2 * np.cos(w2))
    vy = slope * ego_vx

    if cfg.velocity_noise > 0:
        # AR(1) wobble with occasional inflated innovations (road jolts):
        # symmetric and mean-zero, but heavy-tailed the way measured
        # velocities are. The scale is normalized so velocity_noise stays
        # the stationary std.
        rho = 0.95
        p_jolt, jolt = 0.05, 6.0
        tail_var = (1.0 - p_jolt) + p_jolt * jolt * jolt
        innov = cfg.velocity_noise * math.sqrt((1.0 - rho * rho) / tail_var)
        wobble = np.empty((n, 2))
        state_x = state_y = 0.0
        for t in range(n):
            sx = jolt if rng.random() < p_jolt else 1.0
            sy = jolt if rng.random() < p_jolt else 1.0
            state_x = rho * state_x + sx * rng.normal(0.0, innov)
            state_y = rho * state_y + sy * rng.normal(0.0, innov)
            wobble[t, 0] = state_x
            wobble[t, 1] = state_y
        ego_vx = ego_vx + wobble[:, 0]
        vy = vy + wobble[:, 1]

    ego_vel = np.column_stack([ego_vx, vy, np.zeros(n)])
    ego_accel = np.zeros((n, 3))
    ego_accel[1:] = (ego_vel[1:] - ego_vel[:-1]) / dt
    lead_accel = np.zeros(n)
    lead_accel[1:] = (lead_speed[1:] - lead_speed[:-1]) / dt
    heading = np.arctan2(ego_vel[:, 1], ego_vel[:, 0])

    # Intent warns of braking that has not started yet: on when the leader
    # will be braking in INTENT_LEAD_FRAMES frames but is not braking now.
    # Ongoing braking is visible in the kinematic features anyway; the
    # pre-onset warning is the part only the camera channel carries.
    intent = np.zeros(n, dtype=bool)
    intent[:n - INTENT_LEAD_FRAMES] = braking[INTENT_LEAD_FRAMES:] & ~braking[:n - INTENT_LEAD_FRAMES]

    return Trace(times=t_axis, ego_pos=np.column_stack([ego_x, y]),
                 ego_vel=ego_vel, ego_accel=ego_accel, heading=heading,
                 leader_x=lead_x, leader_speed=lead_speed,
                 leader_accel=lead_accel, gap=gaps, brake_active=braking,
                 intent=intent)


def generate_segment(cfg: ScenarioConfig) -> Segment:
    """Build a Segment from a simulated trace (without embeddings)."""
    trace = simulate_trace(cfg)
    n = cfg.n_frames
    frames = []
    for t in range(n):
        pose = yaw_pose(float(trace.heading[t]),
                        (float(trace.ego_pos[t, 0]), float(trace.ego_pos[t, 1]), 0.0))
        leader_center_g = np.array([trace.leader_x[t] - LEADER_DIMS[0] / 2.0, 0.0, 0.0])
        heading_v = -float(trace.heading[t])
        if heading_v <= -math.pi:
            heading_v += 2.0 * math.pi
        leader = TrackedObject(
            obj_id="leader",
            obj_type=ObjectType.VEHICLE,
            center_v=to_vehicle(leader_center_g, pose),
            dims=np.array(LEADER_DIMS),
            heading=heading_v,
            velocity_v=rotate_to_vehicle(np.array([trace.leader_speed[t], 0.0, 0.0]), pose),
            accel_v=rotate_to_vehicle(np.array([trace.leader_accel[t], 0.0, 0.0]), pose),
        )
        frames.append(Frame(
            segment_id=cfg.segment_id,
            t_index=t,
            timestamp_s=float(trace.times[t]),
            pose=pose,
            ego_velocity_g=trace.ego_vel[t],
            labels=(leader,),
        ))
    seg = Segment(cfg.segment_id, frames, nominal_dt=cfg.dt)
    seg.validate()
    return seg


def _view_projections(cfg: ScenarioConfig) -> dict[CameraView, np.ndarray]:
    """Per-view projection matrices, shared across a corpus via embedding_seed."""
    projections = {}
    for idx, view in enumerate(CameraView):
        rng = np.random.default_rng(cfg.embedding_seed * 1000 + idx)
        projections[view] = rng.normal(0.0, 1.0, size=(4, cfg.embedding_dim))
    return projections


def _latents(trace: Trace, cfg: ScenarioConfig) -> dict[CameraView, np.ndarray]:
    """Latent scene variables per view, scaled to O(1)."""
    gap_n = trace.gap / 30.0
    rel_speed = (trace.leader_speed - trace.ego_vel[:, 0]) / 3.0
    lead_n = trace.leader_speed / 30.0
    ego_n = trace.ego_vel[:, 0] / 30.0
    lat = trace.ego_pos[:, 1] / 0.5
    lat_v = trace.ego_vel[:, 1] / 0.5
    intent = np.where(trace.intent, 1.0, -1.0)
    front = np.column_stack([gap_n, rel_speed, lead_n, intent])
    context = np.column_stack([lat, lat_v, ego_n, gap_n])
    return {
        CameraView.FRONT: front,
        CameraView.FRONT_LEFT: context,
        CameraView.FRONT_RIGHT: context,
        CameraView.SIDE_LEFT: context,
        CameraView.SIDE_RIGHT: context,
    }


def attach_embeddings(segment: Segment, cfg: ScenarioConfig) -> Segment:
    """Add pseudo camera embeddings to a generated segment.

    The trace is re-simulated from cfg (generation is deterministic), so the
    segment must be the one cfg produces. Embeddings are
    ``tanh(latents @ P_view) + noise`` with per-view projections seeded by
    embedding_seed and noise (sigma 0.01) seeded by the segment seed.
    """
    if cfg.embedding_dim <= 0:
        raise ValueError("embedding_dim must be positive to attach embeddings")
    if segment.segment_id != cfg.segment_id:
        raise ValueError(f"segment {segment.segment_id!r} was not generated "
                         f"by this config ({cfg.segment_id!r})")
    trace = simulate_trace(cfg)
    latents = _latents(trace, cfg)
    projections = _view_projections(cfg)
    noise_rng = np.random.default_rng(cfg.seed + 905157)
    frames = []
    for t, frame in enumerate(segment.frames):
        emb = {}
        for view in CameraView:
            clean = np.tanh(latents[view][t] @ projections[view])
            emb[view] = clean + noise_rng.normal(0.0, 0.01, size=cfg.embedding_dim)
        frames.append(Frame(frame.segment_id, frame.t_index, frame.timestamp_s,
                            frame.pose, frame.ego_velocity_g, frame.labels,
                            embeddings=emb))
    return Segment(segment.segment_id, frames, segment.nominal_dt)


def generate_corpus(n_segments: int, split_ratio: float, base_seed: int,
                    out_dir, cfg: Optional[ScenarioConfig] = None) -> dict:
    """Write a train/val corpus as JSONL plus a manifest.

    Segments get distinct seeds (base_seed + i) and split by whole segments:
    the first round(n * ratio) go to train. Returns the manifest dict.
    """
    if n_segments < 2:
        raise ValueError("need at least 2 segments to split")
    if not 0.0 < split_ratio < 1.0:
        raise ValueError("split_ratio must be in (0, 1)")
    template = cfg if cfg is not None else ScenarioConfig()

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    segments = []
    for i in range(n_segments):
        seg_cfg = ScenarioConfig(**{**asdict(template), "seed": base_seed + i})
        seg = generate_segment(seg_cfg)
        if seg_cfg.embedding_dim > 0:
            seg = attach_embeddings(seg, seg_cfg)
        segments.append(seg)

    n_train = int(round(n_segments * split_ratio))
    n_train = min(max(n_train, 1), n_segments - 1)
    train, val = segments[:n_train], segments[n_train:]
    save_segments(train, out_dir / "train.jsonl")
    save_segments(val, out_dir / "val.jsonl")
    manifest = {
        "base_seed": base_seed,
        "n_segments": n_segments,
        "split_ratio": split_ratio,
        "config": asdict(template),
        "train_segments": [s.segment_id for s in train],
        "val_segments": [s.segment_id for s in val],
        "embedding_dim": template.embedding_dim or None,
    }
    with open(out_dir / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest

"""Domain records for driving segments and the JSONL interchange format.

A Segment is one continuous drive: an ordered list of Frames, each carrying
the ego pose, ego velocity, labeled objects, and (optionally) per-camera
embedding vectors. Segments cross module boundaries as JSONL text, one frame
per line, with a fixed field order so serialization round-trips byte-for-byte.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import IO, Iterable, Mapping, Optional, Sequence

import numpy as np

# Fixed order of the 12 per-frame features.
FEATURE_NAMES = (
    "v_x", "v_y", "v_z",          # ego velocity, global frame
    "v_fx", "v_fy", "v_fz",       # front-car velocity, global frame
    "a_fx", "a_fy", "a_fz",       # front-car acceleration, global frame
    "dx", "dy",                   # front-car displacement, ego frame
    "num_v_labels",               # vehicles in the detection corridor
)
NUM_FEATURES = len(FEATURE_NAMES)

HISTORY_LEN = 10   # frames of observed history per training window
HORIZON_LEN = 5    # future frames of predicted acceleration


class ParseError(ValueError):
    """Malformed JSONL input; carries the 1-based line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class ValidationError(ValueError):
    """A record violates a domain invariant; names the segment and field."""

    def __init__(self, segment_id: str, fieldname: str, message: str):
        super().__init__(f"segment {segment_id!r}, field {fieldname!r}: {message}")
        self.segment_id = segment_id
        self.fieldname = fieldname


class ObjectType(str, Enum):
    """Categories a labeled bounding box can take."""

    VEHICLE = "vehicle"
    PEDESTRIAN = "pedestrian"
    CYCLIST = "cyclist"
    SIGN = "sign"
    UNKNOWN = "unknown"


class CameraView(str, Enum):
    """The five camera mounting positions."""

    FRONT = "front"
    FRONT_LEFT = "front_left"
    FRONT_RIGHT = "front_right"
    SIDE_LEFT = "side_left"
    SIDE_RIGHT = "side_right"


# Canonical serialization order for embedding views.
VIEW_ORDER = tuple(v.value for v in CameraView)


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Pose:
    """Row-major 4x4 homogeneous transform from the vehicle frame to the
    global frame, applied to row vectors: ``[x, 1] @ m`` gives global coords.
    """

    m: np.ndarray  # shape (4, 4), float64

    def __post_init__(self):
        m = np.asarray(self.m, dtype=np.float64).reshape(4, 4)
        object.__setattr__(self, "m", _readonly(m))

    @property
    def rotation(self) -> np.ndarray:
        """3x3 rotation block (row-vector convention)."""
        return self.m[:3, :3]

    @property
    def translation(self) -> np.ndarray:
        """Translation, the last row's first three entries."""
        return self.m[3, :3]

    def validate(self, segment_id: str = "?") -> None:
        r = self.rotation
        err = np.abs(r.T @ r - np.eye(3)).max()
        if not err < 1e-6:
            raise ValidationError(segment_id, "pose",
                                  f"rotation block not orthonormal (|R'R - I| = {err:.3g})")
        if not np.linalg.det(r) > 0:
            raise ValidationError(segment_id, "pose", "rotation block must be proper (det > 0)")
        last_col = self.m[:, 3]
        if np.abs(last_col - np.array([0.0, 0.0, 0.0, 1.0])).max() > 1e-9:
            raise ValidationError(segment_id, "pose", "last column must be [0, 0, 0, 1]")

    @staticmethod
    def identity() -> "Pose":
        return Pose(np.eye(4))


@dataclass(frozen=True, eq=False)
class TrackedObject:
    """One labeled bounding box, expressed in the ego vehicle frame."""

    obj_id: str
    obj_type: ObjectType
    center_v: np.ndarray      # (3,) meters
    dims: np.ndarray          # (3,) length, width, height, meters
    heading: float            # radians, (-pi, pi]
    velocity_v: np.ndarray    # (3,) m/s
    accel_v: Optional[np.ndarray] = None  # (3,) m/s^2

    def __post_init__(self):
        object.__setattr__(self, "obj_type", ObjectType(self.obj_type))
        object.__setattr__(self, "center_v", _readonly(np.asarray(self.center_v).reshape(3)))
        object.__setattr__(self, "dims", _readonly(np.asarray(self.dims).reshape(3)))
        object.__setattr__(self, "heading", float(self.heading))
        object.__setattr__(self, "velocity_v", _readonly(np.asarray(self.velocity_v).reshape(3)))
        if self.accel_v is not None:
            object.__setattr__(self, "accel_v", _readonly(np.asarray(self.accel_v).reshape(3)))

    def validate(self, segment_id: str = "?") -> None:
        if not np.all(self.dims > 0):
            raise ValidationError(segment_id, "dims", "dims must be > 0")
        if not (-math.pi < self.heading <= math.pi + 1e-12):
            raise ValidationError(segment_id, "heading", "heading must lie in (-pi, pi]")
        for name in ("center_v", "velocity_v"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValidationError(segment_id, name, "entries must be finite")
        if self.accel_v is not None and not np.all(np.isfinite(self.accel_v)):
            raise ValidationError(segment_id, "accel_v", "entries must be finite")


@dataclass(frozen=True, eq=False)
class Frame:
    """One timestep of a segment."""

    segment_id: str
    t_index: int
    timestamp_s: float
    pose: Pose
    ego_velocity_g: np.ndarray                   # (3,) m/s, global frame
    labels: tuple[TrackedObject, ...] = ()
    embeddings: Optional[dict[CameraView, np.ndarray]] = None
    ego_accel_g: Optional[np.ndarray] = None     # (3,) m/s^2, filled by the pipeline

    def __post_init__(self):
        object.__setattr__(self, "t_index", int(self.t_index))
        object.__setattr__(self, "timestamp_s", float(self.timestamp_s))
        object.__setattr__(self, "ego_velocity_g",
                           _readonly(np.asarray(self.ego_velocity_g).reshape(3)))
        object.__setattr__(self, "labels", tuple(self.labels))
        if self.embeddings is not None:
            emb = {CameraView(k): _readonly(np.asarray(v).reshape(-1))
                   for k, v in self.embeddings.items()}
            object.__setattr__(self, "embeddings", emb)
        if self.ego_accel_g is not None:
            object.__setattr__(self, "ego_accel_g",
                               _readonly(np.asarray(self.ego_accel_g).reshape(3)))

    def validate(self) -> None:
        sid = self.segment_id
        if self.t_index < 0:
            raise ValidationError(sid, "t_index", "must be non-negative")
        if not np.all(np.isfinite(self.ego_velocity_g)):
            raise ValidationError(sid, "ego_velocity_g", "entries must be finite")
        self.pose.validate(sid)
        for lab in self.labels:
            lab.validate(sid)

    def with_accel(self, accel: np.ndarray) -> "Frame":
        """Copy of this frame with ego_accel_g replaced."""
        return Frame(self.segment_id, self.t_index, self.timestamp_s, self.pose,
                     self.ego_velocity_g, self.labels, self.embeddings, accel)


@dataclass(frozen=True, eq=False)
class Segment:
    """An ordered run of frames from one drive."""

    segment_id: str
    frames: tuple[Frame, ...]
    nominal_dt: float = 0.1  # seconds between frames at the nominal rate

    def __post_init__(self):
        object.__setattr__(self, "frames", tuple(self.frames))
        object.__setattr__(self, "nominal_dt", float(self.nominal_dt))

    def __len__(self) -> int:
        return len(self.frames)

    @property
    def embedding_views(self) -> tuple[CameraView, ...]:
        if not self.frames or self.frames[0].embeddings is None:
            return ()
        return tuple(v for v in CameraView if v in self.frames[0].embeddings)

    def validate(self) -> None:
        sid = self.segment_id
        if not self.frames:
            raise ValidationError(sid, "frames", "segment has no frames")
        for f in self.frames:
            if f.segment_id != sid:
                raise ValidationError(sid, "segment_id",
                                      f"frame carries segment_id {f.segment_id!r}")
            f.validate()
        idx = [f.t_index for f in self.frames]
        for a, b in zip(idx, idx[1:]):
            if b != a + 1:
                raise ValidationError(sid, "t_index",
                                      f"t_index must increase without gaps ({a} -> {b})")
        ts = [f.timestamp_s for f in self.frames]
        for a, b in zip(ts, ts[1:]):
            if not b > a:
                raise ValidationError(sid, "timestamp_s",
                                      f"timestamps must strictly increase ({a} -> {b})")
        if len(ts) > 1:
            for a, b in zip(ts, ts[1:]):
                dt = b - a
                if abs(dt - self.nominal_dt) > 0.1 * self.nominal_dt + 1e-12:
                    raise ValidationError(
                        sid, "timestamp_s",
                        f"frame spacing {dt:.6g}s deviates more than 10% from "
                        f"nominal {self.nominal_dt:.6g}s")
        # Embedding views and dimension must be uniform within the segment.
        views = self.embedding_views
        dim = None
        for f in self.frames:
            fv = () if f.embeddings is None else tuple(v for v in CameraView if v in f.embeddings)
            if fv != views:
                raise ValidationError(sid, "embeddings", "views differ between frames")
            for v in fv:
                d = f.embeddings[v].shape[0]
                if dim is None:
                    dim = d
                elif d != dim:
                    raise ValidationError(sid, "embeddings",
                                          f"dimension differs between frames ({dim} vs {d})")

    @property
    def embedding_dim(self) -> Optional[int]:
        views = self.embedding_views
        if not views:
            return None
        return int(self.frames[0].embeddings[views[0]].shape[0])


@dataclass(frozen=True, eq=False)
class WindowSample:
    """One training example: 10 history frames and 5 future accelerations.

    ``target`` holds the smoothed (a_x, a_y) of frames start_index+10 ..
    start_index+14; ``raw_target`` keeps the unsmoothed values for
    diagnostics, and ``last_accel`` the smoothed (a_x, a_y) of the last
    history frame (the persistence baseline's input).
    """

    features: np.ndarray                 # (history, 12)
    target: np.ndarray                   # (horizon, 2)
    segment_id: str
    start_index: int
    embeddings: Optional[dict[CameraView, np.ndarray]] = None  # view -> (history, D)
    raw_target: Optional[np.ndarray] = None   # (horizon, 2)
    last_accel: Optional[np.ndarray] = None   # (2,)

    def __post_init__(self):
        object.__setattr__(self, "features", _readonly(np.asarray(self.features)))
        object.__setattr__(self, "target", _readonly(np.asarray(self.target)))
        if self.embeddings is not None:
            emb = {CameraView(k): _readonly(np.asarray(v)) for k, v in self.embeddings.items()}
            object.__setattr__(self, "embeddings", emb)
        if self.raw_target is not None:
            object.__setattr__(self, "raw_target", _readonly(np.asarray(self.raw_target)))
        if self.last_accel is not None:
            object.__setattr__(self, "last_accel", _readonly(np.asarray(self.last_accel)))
        if self.features.ndim != 2 or self.features.shape[1] != NUM_FEATURES:
            raise ValueError(f"features must be (history, {NUM_FEATURES}), "
                             f"got {self.features.shape}")
        if self.target.ndim != 2 or self.target.shape[1] != 2:
            raise ValueError(f"target must be (horizon, 2), got {self.target.shape}")


# ---------------------------------------------------------------------------
# JSONL interchange


def _frame_to_obj(frame: Frame) -> dict:
    labels = []
    for lab in frame.labels:
        d = {
            "obj_id": lab.obj_id,
            "obj_type": lab.obj_type.value,
            "center_v": list(lab.center_v),
            "dims": list(lab.dims),
            "heading": lab.heading,
            "velocity_v": list(lab.velocity_v),
        }
        if lab.accel_v is not None:
            d["accel_v"] = list(lab.accel_v)
        labels.append(d)
    obj = {
        "segment_id": frame.segment_id,
        "t_index": frame.t_index,
        "timestamp_s": frame.timestamp_s,
        "pose": [float(x) for x in frame.pose.m.reshape(16)],
        "ego_velocity_g": list(frame.ego_velocity_g),
        "labels": labels,
    }
    if frame.embeddings is not None:
        obj["embeddings"] = {v: list(frame.embeddings[CameraView(v)])
                             for v in VIEW_ORDER if CameraView(v) in frame.embeddings}
    return obj


def serialize_segments(segments: Iterable[Segment]) -> str:
    """Render segments as JSONL, one frame per line, canonical field order.

    Floats use the shortest decimal rendering that round-trips, so
    ``parse_segments(serialize_segments(s))`` reproduces ``s`` exactly.
    """
    lines = []
    for seg in segments:
        for frame in seg.frames:
            lines.append(json.dumps(_frame_to_obj(frame),
                                    separators=(",", ":"), ensure_ascii=False))
    return "".join(line + "\n" for line in lines)


def _require(obj: dict, key: str, line_no: int):
    if key not in obj:
        raise ParseError(line_no, f"missing field {key!r}")
    return obj[key]


def _parse_vec(value, n: int, key: str, line_no: int) -> np.ndarray:
    if (not isinstance(value, list) or len(value) != n
            or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in value)):
        raise ParseError(line_no, f"field {key!r} must be an array of {n} numbers")
    return np.array(value, dtype=np.float64)


def _parse_frame(obj: dict, line_no: int) -> Frame:
    if not isinstance(obj, dict):
        raise ParseError(line_no, "line is not a JSON object")
    sid = _require(obj, "segment_id", line_no)
    if not isinstance(sid, str):
        raise ParseError(line_no, "segment_id must be a string")
    t_index = _require(obj, "t_index", line_no)
    if not isinstance(t_index, int) or isinstance(t_index, bool):
        raise ParseError(line_no, "t_index must be an integer")
    timestamp = _require(obj, "timestamp_s", line_no)
    if not isinstance(timestamp, (int, float)) or isinstance(timestamp, bool):
        raise ParseError(line_no, "timestamp_s must be a number")
    pose = Pose(_parse_vec(_require(obj, "pose", line_no), 16, "pose", line_no).reshape(4, 4))
    vel = _parse_vec(_require(obj, "ego_velocity_g", line_no), 3, "ego_velocity_g", line_no)

    raw_labels = _require(obj, "labels", line_no)
    if not isinstance(raw_labels, list):
        raise ParseError(line_no, "labels must be an array")
    labels = []
    for lab in raw_labels:
        if not isinstance(lab, dict):
            raise ParseError(line_no, "label entries must be objects")
        try:
            obj_type = ObjectType(_require(lab, "obj_type", line_no))
        except ValueError:
            raise ParseError(line_no, f"unknown obj_type {lab.get('obj_type')!r}") from None
        accel = lab.get("accel_v")
        labels.append(TrackedObject(
            obj_id=str(_require(lab, "obj_id", line_no)),
            obj_type=obj_type,
            center_v=_parse_vec(_require(lab, "center_v", line_no), 3, "center_v", line_no),
            dims=_parse_vec(_require(lab, "dims", line_no), 3, "dims", line_no),
            heading=float(_require(lab, "heading", line_no)),
            velocity_v=_parse_vec(_require(lab, "velocity_v", line_no), 3, "velocity_v", line_no),
            accel_v=None if accel is None else _parse_vec(accel, 3, "accel_v", line_no),
        ))

    embeddings = None
    if "embeddings" in obj and obj["embeddings"] is not None:
        raw_emb = obj["embeddings"]
        if not isinstance(raw_emb, dict):
            raise ParseError(line_no, "embeddings must be an object")
        embeddings = {}
        for view_name, vec in raw_emb.items():
            try:
                view = CameraView(view_name)
            except ValueError:
                raise ParseError(line_no, f"unknown camera view {view_name!r}") from None
            if not isinstance(vec, list) or not vec:
                raise ParseError(line_no, f"embedding {view_name!r} must be a non-empty array")
            embeddings[view] = _parse_vec(vec, len(vec), view_name, line_no)

    return Frame(segment_id=sid, t_index=t_index, timestamp_s=float(timestamp),
                 pose=pose, ego_velocity_g=vel, labels=labels, embeddings=embeddings)


def _infer_nominal_dt(timestamps: Sequence[float]) -> float:
    if len(timestamps) < 2:
        return 0.1
    deltas = np.diff(np.asarray(timestamps, dtype=np.float64))
    return float(np.median(deltas))


def parse_segments(stream: str | IO[str] | Iterable[str]) -> list[Segment]:
    """Parse JSONL text into validated Segments.

    Frames are grouped by segment_id and sorted by t_index; segments come
    back in order of first appearance. Each segment's nominal frame spacing
    is inferred as the median timestamp delta.

    Raises:
        ParseError: malformed line (carries the 1-based line number).
        ValidationError: a domain invariant fails (names segment and field).
    """
    if isinstance(stream, str):
        lines: Iterable[str] = stream.splitlines()
    else:
        lines = stream

    by_segment: dict[str, list[Frame]] = {}
    for line_no, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(line_no, f"invalid JSON ({exc.msg})") from None
        frame = _parse_frame(obj, line_no)
        by_segment.setdefault(frame.segment_id, []).append(frame)

    segments = []
    emb_dim: Optional[int] = None
    for sid, frames in by_segment.items():
        frames.sort(key=lambda f: f.t_index)
        seg = Segment(segment_id=sid, frames=frames,
                      nominal_dt=_infer_nominal_dt([f.timestamp_s for f in frames]))
        seg.validate()
        d = seg.embedding_dim
        if d is not None:
            if emb_dim is None:
                emb_dim = d
            elif d != emb_dim:
                raise ValidationError(sid, "embeddings",
                                      f"dimension {d} differs from dataset dimension {emb_dim}")
        segments.append(seg)
    return segments


def load_segments(path) -> list[Segment]:
    """Read and parse a JSONL segment file."""
    with open(path, "r", encoding="utf-8") as fh:
        return parse_segments(fh)


def save_segments(segments: Iterable[Segment], path) -> None:
    """Serialize segments to a JSONL file (UTF-8, LF line endings)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize_segments(segments))

"""Coordinate transforms and front-vehicle detection.

Points move between the ego vehicle frame and the global frame through the
pose matrix under the row-vector convention: ``[p, 1] @ pose.m``. The front
vehicle is found by intersecting each vehicle box, projected to the ground
plane as an oriented rectangle, with a forward corridor of configurable
half-width (the detection tolerance); tolerance 0 degenerates to a ray.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .data import Frame, ObjectType, Pose, TrackedObject


@dataclass(frozen=True)
class DetectionConfig:
    """Forward-corridor geometry used to find the front vehicle."""

    tolerance: float = 1.0    # corridor half-width, meters (>= 0)
    max_range: float = 100.0  # corridor length, meters (> 0)

    def __post_init__(self):
        if self.tolerance < 0:
            raise ValueError("tolerance must be >= 0")
        if self.max_range <= 0:
            raise ValueError("max_range must be > 0")


@dataclass(frozen=True, eq=False)
class FrontInfo:
    """Detected front vehicle: ego-frame displacement plus global kinematics."""

    obj_id: str
    dx: float                 # forward displacement, meters (> 0)
    dy: float                 # leftward displacement, meters
    velocity_g: np.ndarray    # (3,) m/s, global frame
    accel_g: Optional[np.ndarray]  # (3,) m/s^2, global frame, if labeled


def to_global(p_v: np.ndarray, pose: Pose) -> np.ndarray:
    """Map a vehicle-frame point to the global frame: ``[p, 1] @ pose.m``."""
    p_v = np.asarray(p_v, dtype=np.float64).reshape(3)
    return p_v @ pose.m[:3, :3] + pose.m[3, :3]


def to_vehicle(p_g: np.ndarray, pose: Pose) -> np.ndarray:
    """Map a global-frame point back to the vehicle frame (rigid inverse)."""
    p_g = np.asarray(p_g, dtype=np.float64).reshape(3)
    return (p_g - pose.m[3, :3]) @ pose.m[:3, :3].T


def rotate_to_global(d_v: np.ndarray, pose: Pose) -> np.ndarray:
    """Rotate a vehicle-frame direction (velocity, acceleration) to global.

    Directions are not points: the pose translation does not apply.
    """
    return np.asarray(d_v, dtype=np.float64).reshape(3) @ pose.m[:3, :3]


def rotate_to_vehicle(d_g: np.ndarray, pose: Pose) -> np.ndarray:
    """Rotate a global-frame direction into the vehicle frame."""
    return np.asarray(d_g, dtype=np.float64).reshape(3) @ pose.m[:3, :3].T


def yaw_pose(yaw: float, translation=(0.0, 0.0, 0.0)) -> Pose:
    """Pose for a rotation about +z by ``yaw`` then a translation."""
    c, s = math.cos(yaw), math.sin(yaw)
    m = np.eye(4)
    # Row-vector convention: the transpose of the usual column-vector matrix.
    m[:3, :3] = np.array([[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]])
    m[3, :3] = np.asarray(translation, dtype=np.float64)
    return Pose(m)


# ---------------------------------------------------------------------------
# Oriented-rectangle corridor intersection (separating axis test)


def _box_corners(cx: float, cy: float, half_len: float, half_wid: float,
                 heading: float) -> np.ndarray:
    c, s = math.cos(heading), math.sin(heading)
    ex = np.array([c, s]) * half_len     # box +x direction, scaled
    ey = np.array([-s, c]) * half_wid    # box +y direction, scaled
    center = np.array([cx, cy])
    return np.array([center + ex + ey, center + ex - ey,
                     center - ex - ey, center - ex + ey])


def corridor_clearance(obj: TrackedObject, cfg: DetectionConfig) -> float:
    """Signed clearance between a box's ground rectangle and the corridor.

    Positive means separated by that distance along the widest separating
    axis; non-positive means the rectangles intersect (touching counts).
    """
    half_len = float(obj.dims[0]) / 2.0
    half_wid = float(obj.dims[1]) / 2.0
    cx, cy = float(obj.center_v[0]), float(obj.center_v[1])
    heading = float(obj.heading)

    cor_center = np.array([cfg.max_range / 2.0, 0.0])
    cor_half = np.array([cfg.max_range / 2.0, cfg.tolerance])

    c, s = math.cos(heading), math.sin(heading)
    axes = np.array([[1.0, 0.0], [0.0, 1.0], [c, s], [-s, c]])
    box_dirs = np.array([[c, s], [-s, c]])
    box_half = np.array([half_len, half_wid])
    delta = np.array([cx, cy]) - cor_center

    clearance = -math.inf
    for axis in axes:
        r_cor = abs(axis[0]) * cor_half[0] + abs(axis[1]) * cor_half[1]
        r_box = abs(box_dirs[0] @ axis) * box_half[0] + abs(box_dirs[1] @ axis) * box_half[1]
        gap = abs(delta @ axis) - (r_cor + r_box)
        clearance = max(clearance, gap)
    return clearance


def _in_corridor(obj: TrackedObject, cfg: DetectionConfig) -> bool:
    return corridor_clearance(obj, cfg) <= 0.0


def detect_front_vehicle(frame: Frame, cfg: DetectionConfig) -> Optional[FrontInfo]:
    """Find the nearest vehicle ahead whose box intersects the corridor.

    Only vehicle-type labels are considered. Among boxes intersecting the
    corridor with center ahead of the ego (center x > 0), the one with the
    smallest center x wins; exact ties break lexicographically by obj_id.
    Velocity and acceleration come back rotated into the global frame.
    Returns None when nothing qualifies.
    """
    best: Optional[TrackedObject] = None
    for obj in frame.labels:
        if obj.obj_type is not ObjectType.VEHICLE:
            continue
        if obj.center_v[0] <= 0.0:
            continue
        if not _in_corridor(obj, cfg):
            continue
        if (best is None or obj.center_v[0] < best.center_v[0]
                or (obj.center_v[0] == best.center_v[0] and obj.obj_id < best.obj_id)):
            best = obj
    if best is None:
        return None
    accel = None if best.accel_v is None else rotate_to_global(best.accel_v, frame.pose)
    return FrontInfo(
        obj_id=best.obj_id,
        dx=float(best.center_v[0]),
        dy=float(best.center_v[1]),
        velocity_g=rotate_to_global(best.velocity_v, frame.pose),
        accel_g=accel,
    )


def count_corridor_vehicles(frame: Frame, cfg: DetectionConfig) -> int:
    """Count vehicle boxes whose ground rectangles intersect the corridor."""
    return sum(1 for obj in frame.labels
               if obj.obj_type is ObjectType.VEHICLE and _in_corridor(obj, cfg))

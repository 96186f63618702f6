"""Random camera walks around a character.

Each move draws a horizontal step length, an absolute azimuth and a signed
vertical offset from uniform ranges; the camera always looks back at the
character's starting position.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DegenerateUpError, ValidationError
from .seeding import make_rng

START_OFFSET = 0.01  # pose 0 sits this far along -x so it can see the origin
UP = (0.0, 0.0, 1.0)


@dataclass(frozen=True)
class RcmParams:
    mag_low: float = 1.5
    mag_high: float = 3.0
    theta_low: float = -math.pi
    theta_high: float = math.pi
    z_low: float = -0.3
    z_high: float = 0.5
    moves: int = 4
    hold_frames: int = 30
    seed: int = 0

    def __post_init__(self):
        for name in ("mag", "theta", "z"):
            lo, hi = getattr(self, f"{name}_low"), getattr(self, f"{name}_high")
            if not (np.isfinite(lo) and np.isfinite(hi)) or lo > hi:
                raise ValidationError(f"{name} bounds must be finite with low <= high")
        if self.mag_low < 0:
            raise ValidationError("mag_low must be nonnegative")
        if int(self.moves) != self.moves or self.moves < 0:
            raise ValidationError("moves must be a nonnegative integer")
        if int(self.hold_frames) != self.hold_frames or self.hold_frames < 1:
            raise ValidationError("hold_frames must be a positive integer")
        if not 0 <= int(self.seed) < 2**64:
            raise ValidationError("seed must be an unsigned 64-bit integer")

    @classmethod
    def from_dict(cls, doc: dict) -> "RcmParams":
        unknown = set(doc) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValidationError(f"unknown camera parameter(s): {sorted(unknown)}")
        return cls(**doc)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class CameraPose:
    position: np.ndarray
    look_at: np.ndarray
    up_hint: np.ndarray = UP

    def __post_init__(self):
        for name in ("position", "look_at", "up_hint"):
            v = np.asarray(getattr(self, name), dtype=float)
            if v.shape != (3,) or not np.all(np.isfinite(v)):
                raise ValidationError(f"camera {name} must be a finite 3-vector")
            object.__setattr__(self, name, v)
        if np.linalg.norm(self.position - self.look_at) < 1e-12:
            raise ValidationError("camera position coincides with its target")
        n = np.linalg.norm(self.up_hint)
        if abs(n - 1.0) > 1e-9:
            raise ValidationError("up_hint must be a unit vector")

    def to_dict(self) -> dict:
        return {
            "position": self.position.tolist(),
            "look_at": self.look_at.tolist(),
            "up_hint": self.up_hint.tolist(),
        }


@dataclass(frozen=True, eq=False)
class CameraTrajectory:
    poses: tuple[CameraPose, ...]
    hold_frames: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "poses", tuple(self.poses))
        object.__setattr__(self, "hold_frames", tuple(int(h) for h in self.hold_frames))
        if not self.poses:
            raise ValidationError("camera trajectory is empty")
        if len(self.hold_frames) != len(self.poses):
            raise ValidationError("need one hold duration per camera pose")
        if any(h < 1 for h in self.hold_frames):
            raise ValidationError("hold durations must be positive")

    def __len__(self):
        return len(self.poses)

    @property
    def positions(self) -> np.ndarray:
        return np.array([p.position for p in self.poses])

    def pose_for_frame(self, frame: int) -> CameraPose:
        """Active pose at ``frame``; the schedule cycles once exhausted."""
        t = frame % sum(self.hold_frames)
        for pose, hold in zip(self.poses, self.hold_frames):
            if t < hold:
                return pose
            t -= hold
        raise AssertionError("unreachable")

    def to_dict(self) -> dict:
        return {
            "poses": [
                {**p.to_dict(), "hold_frames": h} for p, h in zip(self.poses, self.hold_frames)
            ]
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "CameraTrajectory":
        try:
            recs = list(doc["poses"])
            poses = [CameraPose(r["position"], r["look_at"], r.get("up_hint", UP)) for r in recs]
            holds = [int(r["hold_frames"]) for r in recs]
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"bad trajectory document: {exc}") from exc
        return cls(tuple(poses), tuple(holds))


def rcm_step(pos, params: RcmParams, rng: np.random.Generator) -> np.ndarray:
    """One random move: ``pos + (m cos t, m sin t, dz)``."""
    m = rng.uniform(params.mag_low, params.mag_high)
    theta = rng.uniform(params.theta_low, params.theta_high)
    dz = rng.uniform(params.z_low, params.z_high)
    return np.asarray(pos, dtype=float) + np.array([m * math.cos(theta), m * math.sin(theta), dz])


def rcm_trajectory(origin, params: RcmParams, rng: np.random.Generator | None = None) -> CameraTrajectory:
    """A walk of ``params.moves`` steps starting at the character ``origin``.

    The walk itself starts exactly at ``origin``; only the displayed pose 0
    is nudged by a centimetre along -x so it has a view direction.
    """
    o = np.asarray(origin, dtype=float)
    if o.shape != (3,) or not np.all(np.isfinite(o)):
        raise ValidationError("origin must be a finite 3-vector")
    if rng is None:
        rng = make_rng(params.seed)
    positions = [o.copy()]
    for _ in range(params.moves):
        positions.append(rcm_step(positions[-1], params, rng))
    positions[0] = o - np.array([START_OFFSET, 0.0, 0.0])
    poses = tuple(CameraPose(p, o.copy(), UP) for p in positions)
    return CameraTrajectory(poses, (params.hold_frames,) * len(poses))


def look_at_orientation(pose: CameraPose) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Orthonormal ``(right, up, forward)`` basis of a camera aimed at its target."""
    forward = pose.look_at - pose.position
    forward = forward / np.linalg.norm(forward)
    right = np.cross(forward, pose.up_hint)
    n = np.linalg.norm(right)
    if n < 1e-9:
        raise DegenerateUpError("view direction is parallel to the up hint")
    right = right / n
    up = np.cross(right, forward)
    return right, up, forward

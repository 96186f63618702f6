"""Software stick-figure renderer.

Joints are projected through a pinhole camera aimed by :mod:`camera`; bones
become one-pixel lines and joints small filled discs. Output is an 8-bit RGB
buffer written as binary PPM, so identical inputs give identical bytes.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .camera import CameraPose, CameraTrajectory, look_at_orientation
from .errors import ValidationError
from .rotation import RotationSequence
from .skeleton import CoordinatePose, CoordinateSequence, DofClass, SkeletonTopology, fk_arrays

MIN_DEPTH = 1e-6
NEAR_PLANE = 0.01  # bones are cut here before projection
JOINT_RADIUS = 2
BACKGROUND = (24, 24, 32)
PALETTE = {
    DofClass.ROOT: (255, 255, 255),
    DofClass.THREE_D: (230, 80, 60),
    DofClass.TWO_D: (80, 200, 90),
    DofClass.ONE_D: (70, 140, 240),
    DofClass.STATIC: (160, 160, 160),
}
FRAME_NAME = "frame_{:06d}.{}"


@dataclass(frozen=True)
class CameraIntrinsics:
    focal_px: float = 500.0
    cx: float = 320.0
    cy: float = 240.0
    width: int = 640
    height: int = 480

    def __post_init__(self):
        if not self.focal_px > 0:
            raise ValidationError("focal_px must be positive")
        if int(self.width) != self.width or int(self.height) != self.height:
            raise ValidationError("image size must be integral")
        if self.width < 1 or self.height < 1:
            raise ValidationError("image size must be positive")
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise ValidationError("principal point must lie inside the frame")

    @property
    def principal_point(self) -> tuple[float, float]:
        return (self.cx, self.cy)

    def matrix(self) -> np.ndarray:
        return np.array([[self.focal_px, 0.0, self.cx], [0.0, self.focal_px, self.cy], [0.0, 0.0, 1.0]])

    @classmethod
    def from_dict(cls, doc: dict) -> "CameraIntrinsics":
        doc = dict(doc)
        if "principal_point" in doc:
            doc["cx"], doc["cy"] = doc.pop("principal_point")
        unknown = set(doc) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValidationError(f"unknown intrinsics field(s): {sorted(unknown)}")
        if "width" in doc and "cx" not in doc:
            doc["cx"] = doc["width"] / 2.0
        if "height" in doc and "cy" not in doc:
            doc["cy"] = doc["height"] / 2.0
        return cls(**doc)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class RasterFrame:
    width: int
    height: int
    pixels: np.ndarray  # (height, width, 3) uint8
    blank: bool = False

    def __post_init__(self):
        if self.pixels.shape != (self.height, self.width, 3) or self.pixels.dtype != np.uint8:
            raise ValidationError("pixel buffer must be uint8 of shape (height, width, 3)")

    @property
    def buffer(self) -> bytes:
        return self.pixels.tobytes()

    def to_ppm(self) -> bytes:
        return f"P6\n{self.width} {self.height}\n255\n".encode("ascii") + self.buffer


def camera_coordinates(points, pose: CameraPose) -> np.ndarray:
    """Points as ``(x right, y up, z forward)`` in the camera frame."""
    right, up, forward = look_at_orientation(pose)
    rel = np.asarray(points, dtype=float) - pose.position
    return np.stack([rel @ right, rel @ up, rel @ forward], axis=-1)


def _pinhole(cam_pts: np.ndarray, intr: CameraIntrinsics) -> np.ndarray:
    z = cam_pts[..., 2]
    u = intr.cx + intr.focal_px * cam_pts[..., 0] / z
    v = intr.cy - intr.focal_px * cam_pts[..., 1] / z
    return np.stack([u, v], axis=-1)


def project_points(points, pose: CameraPose, intr: CameraIntrinsics) -> tuple[np.ndarray, np.ndarray]:
    """Pixel coordinates ``(N, 2)`` and a mask of points in front of the camera.

    Entries for points behind the camera are NaN.
    """
    c = camera_coordinates(np.atleast_2d(points), pose)
    front = c[:, 2] > MIN_DEPTH
    uv = np.full((len(c), 2), np.nan)
    uv[front] = _pinhole(c[front], intr)
    return uv, front


def project(point_world, pose: CameraPose, intr: CameraIntrinsics) -> tuple[float, float] | None:
    """``(u, v)`` in pixels, or ``None`` when the point is behind the camera."""
    uv, front = project_points(np.asarray(point_world, dtype=float)[None], pose, intr)
    return (float(uv[0, 0]), float(uv[0, 1])) if front[0] else None


def _clip_segment(p0, p1, xmax, ymax):
    # Liang-Barsky against [0, xmax] x [0, ymax]
    dx, dy = p1[0] - p0[0], p1[1] - p0[1]
    t0, t1 = 0.0, 1.0
    for p, q in ((-dx, p0[0]), (dx, xmax - p0[0]), (-dy, p0[1]), (dy, ymax - p0[1])):
        if p == 0:
            if q < 0:
                return None
            continue
        t = q / p
        if p < 0:
            t0 = max(t0, t)
        else:
            t1 = min(t1, t)
        if t0 > t1:
            return None
    return (p0[0] + t0 * dx, p0[1] + t0 * dy), (p0[0] + t1 * dx, p0[1] + t1 * dy)


def _draw_line(img, x0, y0, x1, y1, color):
    # integer midpoint (Bresenham) rasterization
    dx, dy = abs(x1 - x0), -abs(y1 - y0)
    sx = 1 if x0 < x1 else -1
    sy = 1 if y0 < y1 else -1
    err = dx + dy
    h, w = img.shape[:2]
    while True:
        if 0 <= x0 < w and 0 <= y0 < h:
            img[y0, x0] = color
        if x0 == x1 and y0 == y1:
            return
        e2 = 2 * err
        if e2 >= dy:
            err += dy
            x0 += sx
        if e2 <= dx:
            err += dx
            y0 += sy


def _draw_disc(img, x, y, r, color):
    h, w = img.shape[:2]
    ys, xs = np.ogrid[max(0, y - r): min(h, y + r + 1), max(0, x - r): min(w, x + r + 1)]
    mask = (xs - x) ** 2 + (ys - y) ** 2 <= r * r
    region = img[max(0, y - r): min(h, y + r + 1), max(0, x - r): min(w, x + r + 1)]
    region[mask] = color


def _near_clip(a, b):
    # cut a camera-space segment to the part in front of the near plane
    za, zb = a[2], b[2]
    if za < NEAR_PLANE and zb < NEAR_PLANE:
        return None
    if za < NEAR_PLANE:
        a = a + (NEAR_PLANE - za) / (zb - za) * (b - a)
    elif zb < NEAR_PLANE:
        b = b + (NEAR_PLANE - zb) / (za - zb) * (a - b)
    return a, b


def render_frame(pose: CoordinatePose, topology: SkeletonTopology, cam: CameraPose, intr: CameraIntrinsics) -> RasterFrame:
    """Draw one skeleton pose as seen from ``cam``."""
    pts = pose.positions
    if pts.shape[0] != topology.num_joints:
        raise ValidationError(f"pose has {pts.shape[0]} joints, topology has {topology.num_joints}")
    img = np.empty((intr.height, intr.width, 3), dtype=np.uint8)
    img[:] = BACKGROUND
    c = camera_coordinates(pts, cam)
    front = c[:, 2] > MIN_DEPTH
    if not front.any():
        return RasterFrame(intr.width, intr.height, img, blank=True)
    xmax, ymax = intr.width - 1, intr.height - 1
    for j in topology.joints[1:]:
        seg = _near_clip(c[j.parent], c[j.id])
        if seg is None:
            continue
        uv = _pinhole(np.array(seg), intr)
        clipped = _clip_segment(uv[0], uv[1], xmax, ymax)
        if clipped is None:
            continue
        (x0, y0), (x1, y1) = clipped
        _draw_line(img, int(round(x0)), int(round(y0)), int(round(x1)), int(round(y1)), PALETTE[j.dof_class])
    uv = np.full((len(c), 2), np.nan)
    uv[front] = _pinhole(c[front], intr)
    for j in topology.joints:
        if not front[j.id]:
            continue
        u, v = uv[j.id]
        if -JOINT_RADIUS <= u <= xmax + JOINT_RADIUS and -JOINT_RADIUS <= v <= ymax + JOINT_RADIUS:
            _draw_disc(img, int(round(u)), int(round(v)), JOINT_RADIUS, PALETTE[j.dof_class])
    return RasterFrame(intr.width, intr.height, img)


def clip_positions(seq, topology: SkeletonTopology) -> np.ndarray:
    """World joint positions ``(F, J, 3)`` of a rotation or coordinate sequence."""
    if isinstance(seq, RotationSequence):
        if seq.num_joints != topology.num_joints:
            raise ValidationError("sequence and topology joint counts differ")
        pos, _ = fk_arrays(topology, seq.quaternions.transpose(1, 0, 2), seq.root_positions)
        return pos
    if isinstance(seq, CoordinateSequence):
        return seq.positions
    raise ValidationError(f"cannot render a {type(seq).__name__}")


def render_clip(seq, topology: SkeletonTopology, traj: CameraTrajectory, intr: CameraIntrinsics) -> list[RasterFrame]:
    """One frame per animation frame, each seen from the active trajectory pose."""
    if traj is None or len(traj) == 0:
        raise ValidationError("camera trajectory is empty")
    pos = clip_positions(seq, topology)
    return [render_frame(CoordinatePose(p), topology, traj.pose_for_frame(f), intr) for f, p in enumerate(pos)]


def write_frame(frame: RasterFrame, path, fmt: str = "ppm") -> Path:
    path = Path(path)
    if fmt == "ppm":
        path.write_bytes(frame.to_ppm())
    elif fmt == "png":
        import matplotlib.image

        matplotlib.image.imsave(path, frame.pixels)
    else:
        raise ValidationError(f"unsupported image format {fmt!r}")
    return path


def write_clip(frames, directory, fmt: str = "ppm") -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    return [write_frame(fr, directory / FRAME_NAME.format(i, fmt), fmt) for i, fr in enumerate(frames)]


def read_ppm(path) -> RasterFrame:
    data = Path(path).read_bytes()
    parts = data.split(maxsplit=4)
    if parts[0] != b"P6" or int(parts[3]) != 255:
        raise ValidationError(f"{path} is not an 8-bit binary PPM")
    w, h = int(parts[1]), int(parts[2])
    px = np.frombuffer(parts[4][: w * h * 3], dtype=np.uint8).reshape(h, w, 3).copy()
    return RasterFrame(w, h, px)

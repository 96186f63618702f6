"""Coordinate poses to rotation poses.

Euler angles here are static (extrinsic) Tait-Bryan angles applied in x, y, z
order to the canonical pair ``(+x, +y)``: ``alpha`` rolls about x, ``beta``
lifts +x toward +z (elevation), ``gamma`` turns about z (azimuth). As a
column-vector matrix the composite is ``Rz(gamma) @ Ry(-beta) @ Rx(alpha)``;
the minus sign is only there because a right-handed turn about +y moves +x
toward -z.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateBoneError,
    FrameError,
    RollUndefinedError,
    ValidationError,
    VerticalDegenerateError,
)
from .quaternion import (
    align_hemispheres,
    canonicalize,
    matrix_to_axis_angle,
    quat_conj,
    quat_from_axis_angle,
    quat_inv,
    quat_mul,
    quat_to_matrix,
    swing_twist,
)
from .skeleton import (
    DEGENERATE_BONE,
    CoordinatePose,
    CoordinateSequence,
    DofClass,
    SkeletonTopology,
)

EX = np.array([1.0, 0.0, 0.0])
EY = np.array([0.0, 1.0, 0.0])
EZ = np.array([0.0, 0.0, 1.0])
_PARALLEL_TOL = 1e-12
_BOTTOM_ROW = np.array([0.0, 0.0, 0.0, 1.0])
_I3 = np.eye(3)


def _cross(a, b) -> np.ndarray:
    return np.array(
        [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
    )


def _wrap(angle: float) -> float:
    # (-pi, pi]
    return math.pi if angle <= -math.pi else angle


@dataclass(frozen=True)
class EulerAngles:
    alpha: float
    beta: float
    gamma: float

    def matrix(self) -> np.ndarray:
        return euler_to_matrix(self.alpha, self.beta, self.gamma)


def rm_x(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rm_y(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rm_z(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def euler_to_matrix(alpha: float, beta: float, gamma: float) -> np.ndarray:
    """Rotation matrix of roll ``alpha``, then elevation ``beta``, then azimuth ``gamma``."""
    return rm_z(gamma) @ rm_y(-beta) @ rm_x(alpha)


def euler_gamma_beta(v) -> tuple[float, float]:
    """Azimuth ``gamma`` of ``v``'s xOy projection from +x and elevation ``beta``.

    Signed two-argument forms of the arccos expressions, so ``gamma`` covers
    ``(-pi, pi]`` and ``beta`` covers ``[-pi/2, pi/2]``.

    Raises
    ------
    VerticalDegenerateError
        If ``v`` is (numerically) parallel to the z axis.
    """
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if not n > 0:
        raise ValidationError("cannot take Euler angles of a zero vector")
    rho = math.hypot(v[0], v[1])
    if rho < 1e-9 * n:
        raise VerticalDegenerateError("vector is parallel to the z axis; azimuth undefined")
    return _wrap(math.atan2(v[1], v[0])), math.atan2(v[2], rho)


def euler_alpha(v, r, gamma: float, beta: float) -> float:
    """Roll of the reference vector ``r`` about the target ``v``.

    ``r`` is taken back through the azimuth and the elevation; ``alpha`` is
    the signed angle from +y to what remains of it in the yOz plane.
    """
    v = np.asarray(v, dtype=float)
    r = np.asarray(r, dtype=float)
    nv, nr = np.linalg.norm(v), np.linalg.norm(r)
    if nr == 0 or np.linalg.norm(_cross(v, r)) <= 1e-9 * nv * nr:
        raise RollUndefinedError("reference vector is parallel to the target vector")
    r_x = rm_y(beta) @ (rm_z(-gamma) @ r)
    proj = math.hypot(r_x[1], r_x[2])
    if proj < 1e-9 * nr:
        raise RollUndefinedError("reference vector has no yOz component after un-rotation")
    return _wrap(math.atan2(r_x[2], r_x[1]))


def euler_from_vectors(v, r) -> EulerAngles:
    gamma, beta = euler_gamma_beta(v)
    return EulerAngles(euler_alpha(v, r, gamma, beta), beta, gamma)


def axis_angle_between(v0, v1) -> tuple[np.ndarray, float]:
    """Axis and angle in ``[0, pi]`` turning ``v0`` onto the direction of ``v1``.

    Parallel inputs give ``theta = 0`` about +z. Antiparallel inputs turn by
    pi about ``v0`` crossed with its least-aligned basis vector.
    """
    v0 = np.asarray(v0, dtype=float)
    v1 = np.asarray(v1, dtype=float)
    n0, n1 = np.linalg.norm(v0), np.linalg.norm(v1)
    if not (n0 > 0 and n1 > 0):
        raise ValidationError("axis_angle_between needs nonzero vectors")
    u0, u1 = v0 / n0, v1 / n1
    axis = _cross(u0, u1)
    s = np.linalg.norm(axis)
    c = float(u0 @ u1)
    if s < _PARALLEL_TOL:
        if c > 0:
            return EZ.copy(), 0.0
        basis = np.eye(3)[int(np.argmin(np.abs(u0)))]
        axis = _cross(u0, basis)
        return axis / np.linalg.norm(axis), math.pi
    return axis / s, math.atan2(s, c)


def quaternion_from_axis_angle(axis, theta: float) -> np.ndarray:
    """``(sin(theta/2) * axis, cos(theta/2))``, reported with ``w >= 0``."""
    axis = np.asarray(axis, dtype=float)
    if axis.shape != (3,) or abs(np.linalg.norm(axis) - 1.0) > 1e-9:
        raise ValidationError("rotation axis must be a unit 3-vector")
    return canonicalize(quat_from_axis_angle(axis, theta))


def matrix_to_quaternion(m) -> np.ndarray:
    return quaternion_from_axis_angle(*matrix_to_axis_angle(m))


def euler_to_quaternion(alpha: float, beta: float, gamma: float) -> np.ndarray:
    """Quaternion of the composite Euler rotation, built from its axis and angle."""
    return matrix_to_quaternion(euler_to_matrix(alpha, beta, gamma))


def quaternion_world_to_local(q_child_world, q_parent_world) -> np.ndarray:
    """``Inv(q_parent) x q_child``: the child's orientation seen from its parent."""
    return quat_mul(quat_inv(q_parent_world), q_child_world)


def transformation_matrix(rotation, translation) -> np.ndarray:
    tm = np.eye(4)
    tm[:3, :3] = rotation
    tm[:3, 3] = translation
    return tm


def is_rigid(tm, tol: float = 1e-9) -> bool:
    tm = np.asarray(tm, dtype=float)
    if tm.shape != (4, 4) or np.abs(tm[3] - _BOTTOM_ROW).max() > tol:
        return False
    rm = tm[:3, :3]
    return bool(
        np.abs(rm.T @ rm - _I3).max() <= tol and abs(np.linalg.det(rm) - 1.0) <= tol
    )


def point_world_to_local(p_world, parent_transform) -> np.ndarray:
    """Apply the inverse rigid transform: ``TM^-1 . [x, y, z, 1]``."""
    tm = np.asarray(parent_transform, dtype=float)
    if not is_rigid(tm):
        raise ValidationError("transformation matrix is not a rigid motion")
    rm, t = tm[:3, :3], tm[:3, 3]
    return rm.T @ (np.asarray(p_world, dtype=float) - t)


@dataclass(frozen=True)
class RotationPose:
    root_position: np.ndarray  # (3,)
    local_quaternions: np.ndarray  # (J, 4)
    # ThreeD joints whose roll could not be recovered from their reference child
    roll_fallback: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "root_position", np.asarray(self.root_position, dtype=float))
        object.__setattr__(self, "local_quaternions", np.asarray(self.local_quaternions, dtype=float))


@dataclass(frozen=True)
class RotationSequence:
    """Per-joint local quaternions over time, shape ``(J, F, 4)``, plus root path."""

    fps: float
    root_positions: np.ndarray  # (F, 3)
    quaternions: np.ndarray  # (J, F, 4)
    joint_names: tuple[str, ...] | None = None
    roll_fallback: dict[int, tuple[int, ...]] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        q = np.asarray(self.quaternions, dtype=float)
        rp = np.asarray(self.root_positions, dtype=float)
        if q.ndim != 3 or q.shape[2] != 4 or q.shape[1] < 1:
            raise ValidationError(f"quaternions must have shape (J, F>=1, 4), got {q.shape}")
        if rp.shape != (q.shape[1], 3):
            raise ValidationError(f"root_positions must have shape ({q.shape[1]}, 3), got {rp.shape}")
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(rp))):
            raise ValidationError("rotation sequence contains non-finite values")
        if np.any(np.abs(np.linalg.norm(q, axis=-1) - 1.0) > 1e-6):
            raise ValidationError("rotation sequence quaternions must be unit length")
        if not self.fps > 0:
            raise ValidationError("fps must be positive")
        if self.joint_names is not None:
            names = tuple(self.joint_names)
            if len(names) != q.shape[0]:
                raise ValidationError("joint_names length does not match the joint count")
            object.__setattr__(self, "joint_names", names)
        object.__setattr__(self, "quaternions", q)
        object.__setattr__(self, "root_positions", rp)

    @property
    def num_joints(self) -> int:
        return self.quaternions.shape[0]

    @property
    def num_frames(self) -> int:
        return self.quaternions.shape[1]

    def frame(self, f: int) -> RotationPose:
        return RotationPose(self.root_positions[f], self.quaternions[:, f])


def _rest_frame_quaternion(d: np.ndarray, r0: np.ndarray) -> np.ndarray:
    # maps the canonical pair (+x, +y) onto the rest pair (d, r0)
    frame = np.column_stack([d, r0, _cross(d, r0)])
    return matrix_to_quaternion(frame)


def _frame_align(d, r0, v, r) -> np.ndarray | None:
    r_perp = r - (r @ v) * v
    n = np.linalg.norm(r_perp)
    if n < 1e-9 * max(np.linalg.norm(r), 1e-300):
        return None
    r_perp /= n
    obs = np.column_stack([v, r_perp, _cross(v, r_perp)])
    rest = np.column_stack([d, r0, _cross(d, r0)])
    return matrix_to_quaternion(obs @ rest.T)


def _three_d_world(d, r0, v, r) -> np.ndarray | None:
    """World rotation sending the rest pair ``(d, r0)`` to observed ``(v, r)``."""
    qc = _rest_frame_quaternion(d, r0)
    rc = quat_to_matrix(qc)
    try:
        e = euler_from_vectors(rc.T @ v, rc.T @ r)
    except VerticalDegenerateError:
        # Euler azimuth is undefined; match the two frames directly
        return _frame_align(d, r0, v, r)
    except RollUndefinedError:
        return None
    qe = euler_to_quaternion(e.alpha, e.beta, e.gamma)
    return quat_mul(quat_mul(qc, qe), quat_conj(qc))


def _swing_quat(d, v) -> np.ndarray:
    axis, theta = axis_angle_between(d, v)
    return quaternion_from_axis_angle(axis, theta)


def pose_to_rotation(topology: SkeletonTopology, pose: CoordinatePose) -> RotationPose:
    """Express a coordinate pose as a root position plus local joint quaternions.

    Joints are visited parent-before-child. ThreeD joints take their world
    rotation from Euler angles of the bone and its reference child, then are
    re-expressed in the parent frame. Other joints read their bone in the
    parent frame and take the shortest-arc rotation onto it. Every result is
    projected onto the joint's DOF class (Root yaw only, TwoD no twist about
    the bone, OneD about its pitch axis, Static identity).
    """
    p = pose.positions
    J = topology.num_joints
    if p.shape[0] != J:
        raise ValidationError(f"pose has {p.shape[0]} joints, topology has {J}")
    rest = topology.rest_directions
    local = np.zeros((J, 4))
    world = np.zeros((J, 4))
    fallback = []

    root = topology.joints[0]
    local[0] = [0.0, 0.0, 0.0, 1.0]
    if root.reference_child is not None:
        c = root.reference_child
        vc = p[c] - p[0]
        if np.linalg.norm(vc) < DEGENERATE_BONE:
            raise DegenerateBoneError(f"bone of joint {c} ({topology.joints[c].name}) has zero length")
        if math.hypot(rest[c][0], rest[c][1]) > 1e-9 and math.hypot(vc[0], vc[1]) > 1e-9:
            _, yaw = swing_twist(_swing_quat(rest[c], vc), EZ)
            local[0] = yaw
    world[0] = local[0] = canonicalize(local[0])

    for js in topology.joints[1:]:
        j, par = js.id, js.parent
        b = p[j] - p[par]
        length = np.linalg.norm(b)
        if length < DEGENERATE_BONE:
            raise DegenerateBoneError(f"bone of joint {j} ({js.name}) has zero length")
        d = rest[j]
        cls = js.dof_class
        if cls is DofClass.STATIC:
            q = np.array([0.0, 0.0, 0.0, 1.0])
        elif cls is DofClass.THREE_D:
            r0 = topology.reference_rest_direction(j)
            qw = None
            if r0 is not None:
                c = js.reference_child
                qw = _three_d_world(d, r0, b / length, p[c] - p[j])
            if qw is None:
                fallback.append(j)
                tm = transformation_matrix(quat_to_matrix(world[par]), p[par])
                q = _swing_quat(d, point_world_to_local(p[j], tm))
            else:
                q = quaternion_world_to_local(qw, world[par])
        else:
            tm = transformation_matrix(quat_to_matrix(world[par]), p[par])
            q = _swing_quat(d, point_world_to_local(p[j], tm))
            if cls is DofClass.TWO_D:
                q, _ = swing_twist(q, d)
            else:
                _, q = swing_twist(q, topology.pitch_axis(j))
        q = canonicalize(q / np.linalg.norm(q))
        local[j] = q
        world[j] = quat_mul(world[par], q)
    return RotationPose(p[0].copy(), local, tuple(fallback))


def sequence_to_rotation(topology: SkeletonTopology, seq: CoordinateSequence) -> RotationSequence:
    """Convert every frame, then make each joint's track hemisphere-continuous."""
    F = seq.num_frames
    quats = np.zeros((topology.num_joints, F, 4))
    roots = np.zeros((F, 3))
    fallback = {}
    for f in range(F):
        try:
            rp = pose_to_rotation(topology, CoordinatePose(seq.positions[f]))
        except Exception as exc:
            raise FrameError(f, exc) from exc
        quats[:, f] = rp.local_quaternions
        roots[f] = rp.root_position
        if rp.roll_fallback:
            fallback[f] = rp.roll_fallback
    quats = align_hemispheres(quats, axis=1)
    return RotationSequence(seq.fps, roots, quats, tuple(topology.names), fallback)


def random_dof_pose(
    topology: SkeletonTopology,
    rng: np.random.Generator,
    max_angle: float = 1.2,
    flex_range: tuple[float, float] = (0.2, 1.4),
    root_position=None,
) -> RotationPose:
    """Draw local quaternions that respect every joint's DOF class.

    OneD flexion is kept positive so that reference-child roll recovery is
    unambiguous; swing and free rotations stay within ``max_angle``.
    """
    J = topology.num_joints
    local = np.zeros((J, 4))
    local[:, 3] = 1.0
    for js in topology.joints:
        j = js.id
        cls = js.dof_class
        if cls is DofClass.ROOT:
            local[j] = quat_from_axis_angle(EZ, rng.uniform(-math.pi, math.pi))
        elif cls is DofClass.THREE_D:
            axis = rng.normal(size=3)
            local[j] = quat_from_axis_angle(axis / np.linalg.norm(axis), rng.uniform(0, max_angle))
        elif cls is DofClass.TWO_D:
            d = topology.rest_directions[j]
            axis = rng.normal(size=3)
            axis -= (axis @ d) * d
            local[j] = quat_from_axis_angle(axis / np.linalg.norm(axis), rng.uniform(0, max_angle))
        elif cls is DofClass.ONE_D:
            local[j] = quat_from_axis_angle(topology.pitch_axis(j), rng.uniform(*flex_range))
    if root_position is None:
        root_position = rng.uniform(-1.0, 1.0, size=3)
    return RotationPose(np.asarray(root_position, dtype=float), canonicalize(local))

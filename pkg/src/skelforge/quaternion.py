"""Quaternion algebra on numpy arrays.

Quaternions are stored as ``(..., 4)`` arrays in ``(x, y, z, w)`` order, the
vector part first and the scalar part last. All functions broadcast over
leading dimensions.
"""
from __future__ import annotations

import numpy as np

IDENTITY = np.array([0.0, 0.0, 0.0, 1.0])


def quat_identity(shape=()) -> np.ndarray:
    shape = (shape,) if isinstance(shape, int) else tuple(shape)
    q = np.zeros(shape + (4,))
    q[..., 3] = 1.0
    return q


def quat_mul(q1, q2) -> np.ndarray:
    """Hamilton product ``q1 x q2`` (apply ``q2`` first, then ``q1``)."""
    q1 = np.asarray(q1, dtype=float)
    q2 = np.asarray(q2, dtype=float)
    a1, b1, c1, w1 = q1[..., 0], q1[..., 1], q1[..., 2], q1[..., 3]
    a2, b2, c2, w2 = q2[..., 0], q2[..., 1], q2[..., 2], q2[..., 3]
    out = np.empty(np.broadcast_shapes(q1.shape, q2.shape))
    out[..., 0] = w1 * a2 + a1 * w2 + b1 * c2 - c1 * b2
    out[..., 1] = w1 * b2 - a1 * c2 + b1 * w2 + c1 * a2
    out[..., 2] = w1 * c2 + a1 * b2 - b1 * a2 + c1 * w2
    out[..., 3] = w1 * w2 - a1 * a2 - b1 * b2 - c1 * c2
    return out


def quat_conj(q) -> np.ndarray:
    q = np.array(q, dtype=float)
    q[..., :3] *= -1.0
    return q


def quat_inv(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return quat_conj(q) / np.sum(q * q, axis=-1, keepdims=True)


def quat_norm(q) -> np.ndarray:
    return np.linalg.norm(np.asarray(q, dtype=float), axis=-1)


def quat_normalize(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return q / np.linalg.norm(q, axis=-1, keepdims=True)


def quat_rotate(q, v) -> np.ndarray:
    """Rotate vectors ``v`` by unit quaternions ``q`` via ``q v q*``."""
    v = np.asarray(v, dtype=float)
    q = np.asarray(q, dtype=float)
    pure = np.concatenate([v, np.zeros(v.shape[:-1] + (1,))], axis=-1)
    return quat_mul(quat_mul(q, pure), quat_conj(q))[..., :3]


def quat_from_axis_angle(axis, theta) -> np.ndarray:
    axis = np.asarray(axis, dtype=float)
    half = 0.5 * np.asarray(theta, dtype=float)[..., None]
    vec = np.sin(half) * axis
    w = np.broadcast_to(np.cos(half), vec.shape[:-1] + (1,))
    return np.concatenate([vec, w], axis=-1)


def quat_angle(q) -> np.ndarray:
    """Rotation angle in ``[0, pi]`` of unit quaternions (sign-insensitive)."""
    q = np.asarray(q, dtype=float)
    return 2.0 * np.arctan2(np.linalg.norm(q[..., :3], axis=-1), np.abs(q[..., 3]))


def canonicalize(q) -> np.ndarray:
    """Pick the ``w >= 0`` representative of each quaternion."""
    q = np.array(q, dtype=float)
    flip = q[..., 3] < 0
    q[flip] *= -1.0
    return q


def align_hemispheres(q, axis: int = 0) -> np.ndarray:
    """Flip signs along ``axis`` so consecutive quaternions have dot >= 0.

    The first element along ``axis`` is left untouched.
    """
    q = np.moveaxis(np.array(q, dtype=float), axis, 0)
    if q.shape[0] > 1:
        dots = np.sum(q[1:] * q[:-1], axis=-1)
        signs = np.where(dots < 0, -1.0, 1.0)
        q[1:] *= np.cumprod(signs, axis=0)[..., None]
    return np.moveaxis(q, 0, axis)


def quat_to_matrix(q) -> np.ndarray:
    q = quat_normalize(q)
    x, y, z, w = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    m = np.empty(q.shape[:-1] + (3, 3))
    m[..., 0, 0] = 1 - 2 * (y * y + z * z)
    m[..., 0, 1] = 2 * (x * y - z * w)
    m[..., 0, 2] = 2 * (x * z + y * w)
    m[..., 1, 0] = 2 * (x * y + z * w)
    m[..., 1, 1] = 1 - 2 * (x * x + z * z)
    m[..., 1, 2] = 2 * (y * z - x * w)
    m[..., 2, 0] = 2 * (x * z - y * w)
    m[..., 2, 1] = 2 * (y * z + x * w)
    m[..., 2, 2] = 1 - 2 * (x * x + y * y)
    return m


def matrix_to_axis_angle(m) -> tuple[np.ndarray, float]:
    """Axis and angle in ``[0, pi]`` of a single 3x3 rotation matrix."""
    m = np.asarray(m, dtype=float)
    skew = 0.5 * np.array([m[2, 1] - m[1, 2], m[0, 2] - m[2, 0], m[1, 0] - m[0, 1]])
    s = np.linalg.norm(skew)
    c = 0.5 * (np.trace(m) - 1.0)
    theta = float(np.arctan2(s, c))
    if theta < 1e-300:
        return np.array([0.0, 0.0, 1.0]), 0.0
    if c >= 0.0:
        # rescale first so tiny angles do not underflow the norm
        axis = skew / np.abs(skew).max()
        return axis / np.linalg.norm(axis), theta
    # near pi the skew part vanishes; read the axis from the symmetric part
    outer = (0.5 * (m + m.T) - c * np.eye(3)) / (1.0 - c)
    k = int(np.argmax(np.diag(outer)))
    axis = outer[:, k] / np.sqrt(outer[k, k])
    axis /= np.linalg.norm(axis)
    if axis @ skew < 0:
        axis = -axis
    return axis, theta


def swing_twist(q, axis) -> tuple[np.ndarray, np.ndarray]:
    """Split ``q = swing x twist`` where ``twist`` rotates about ``axis``.

    ``axis`` must be a unit vector. When ``q`` is a half turn about an axis
    perpendicular to ``axis`` the twist is taken to be the identity.
    """
    q = np.asarray(q, dtype=float)
    axis = np.asarray(axis, dtype=float)
    proj = np.sum(q[..., :3] * axis, axis=-1, keepdims=True) * axis
    twist = np.concatenate([proj, q[..., 3:]], axis=-1)
    n = np.linalg.norm(twist, axis=-1, keepdims=True)
    twist = np.where(n > 1e-12, twist / np.where(n > 0, n, 1.0), IDENTITY)
    swing = quat_mul(q, quat_conj(twist))
    return swing, twist

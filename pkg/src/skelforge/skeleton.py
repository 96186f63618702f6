"""Joint hierarchy, coordinate poses and forward kinematics.

Conventions: right-handed, z-up, meters. Each non-root joint ``j`` owns the
bone running from its parent's position to its own position. Its local
rotation turns its rest bone direction inside the parent's frame, so the
world orientation of ``j`` is ``world[parent] x local[j]`` and its position
is ``pos[parent] + world[j] * (rest_direction[j] * bone_length[j])``.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from importlib import resources
from os import PathLike
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from .errors import DegenerateBoneError, TopologyError, ValidationError
from .quaternion import quat_mul, quat_rotate

UNIT_TOL = 1e-9
QUAT_UNIT_TOL = 1e-6
DEGENERATE_BONE = 1e-9


class DofClass(str, enum.Enum):
    ROOT = "Root"
    THREE_D = "ThreeD"
    TWO_D = "TwoD"
    ONE_D = "OneD"
    STATIC = "Static"


@dataclass(frozen=True)
class JointSpec:
    id: int
    name: str
    parent: int | None
    dof_class: DofClass
    rest_direction: tuple[float, float, float]
    reference_child: int | None = None
    weight: float = 1.0
    # hinge axis of OneD joints, expressed in the parent's frame
    pitch_axis: tuple[float, float, float] | None = None


def _default_pitch_axis(direction: np.ndarray) -> np.ndarray:
    axis = np.cross(direction, [0.0, 0.0, 1.0])
    n = np.linalg.norm(axis)
    if n < 1e-9:
        return np.array([0.0, 1.0, 0.0])
    return axis / n


@dataclass(frozen=True)
class SkeletonTopology:
    """Validated joint tree; joints are stored parent-before-child."""

    joints: tuple[JointSpec, ...]
    bone_lengths: np.ndarray
    name: str = "skeleton"
    _children: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        lengths = np.asarray(self.bone_lengths, dtype=float)
        lengths.setflags(write=False)
        object.__setattr__(self, "bone_lengths", lengths)
        _validate(self.joints, lengths)
        children: list[list[int]] = [[] for _ in self.joints]
        for j in self.joints:
            if j.parent is not None:
                children[j.parent].append(j.id)
        object.__setattr__(self, "_children", tuple(tuple(c) for c in children))

    @property
    def num_joints(self) -> int:
        return len(self.joints)

    @property
    def names(self) -> list[str]:
        return [j.name for j in self.joints]

    @property
    def parents(self) -> np.ndarray:
        return np.array([-1 if j.parent is None else j.parent for j in self.joints])

    @property
    def weights(self) -> np.ndarray:
        return np.array([j.weight for j in self.joints], dtype=float)

    @property
    def rest_directions(self) -> np.ndarray:
        return np.array([j.rest_direction for j in self.joints], dtype=float)

    @property
    def rest_offsets(self) -> np.ndarray:
        """Rest bone vectors; zero for the root."""
        offsets = self.rest_directions * self.bone_lengths[:, None]
        offsets[self.root] = 0.0
        return offsets

    @property
    def root(self) -> int:
        return 0

    def children(self, joint: int) -> tuple[int, ...]:
        return self._children[joint]

    def index(self, name: str) -> int:
        for j in self.joints:
            if j.name == name:
                return j.id
        raise KeyError(name)

    def pitch_axis(self, joint: int) -> np.ndarray:
        spec = self.joints[joint]
        if spec.pitch_axis is not None:
            return np.asarray(spec.pitch_axis, dtype=float)
        return _default_pitch_axis(np.asarray(spec.rest_direction, dtype=float))

    def reference_rest_direction(self, joint: int) -> np.ndarray | None:
        """Rest-frame direction, perpendicular to the bone, that fixes its roll.

        Taken from the reference child: the part of its rest direction normal
        to this bone, or for a collinear hinge child, the direction it swings
        toward under positive flexion. ``None`` when neither exists.
        """
        spec = self.joints[joint]
        if spec.reference_child is None:
            return None
        d = np.asarray(spec.rest_direction, dtype=float)
        child = self.joints[spec.reference_child]
        dc = np.asarray(child.rest_direction, dtype=float)
        perp = dc - (dc @ d) * d
        if np.linalg.norm(perp) > 1e-6:
            return perp / np.linalg.norm(perp)
        if child.dof_class is DofClass.ONE_D:
            flex = np.cross(self.pitch_axis(child.id), dc)
            flex -= (flex @ d) * d
            n = np.linalg.norm(flex)
            if n > 1e-6:
                return flex / n
        return None


def _validate(joints: Sequence[JointSpec], lengths: np.ndarray) -> None:
    n = len(joints)
    if n == 0:
        raise TopologyError("topology has no joints")
    if lengths.shape != (n,):
        raise TopologyError(f"expected {n} bone lengths, got shape {lengths.shape}")
    ids = [j.id for j in joints]
    if len(set(ids)) != n:
        dup = sorted({i for i in ids if ids.count(i) > 1})
        raise TopologyError(f"duplicate joint id(s): {dup}")
    if ids != list(range(n)):
        raise TopologyError("joint ids must be 0..J-1 in parent-before-child order")
    for j in joints:
        if j.parent is not None and not (0 <= j.parent < n):
            raise TopologyError(f"joint {j.id} ({j.name}) has unknown parent {j.parent}")
    for j in joints:
        seen = {j.id}
        p = j.parent
        while p is not None:
            if p in seen:
                raise TopologyError(f"cycle detected through joint {j.id} ({j.name})")
            seen.add(p)
            p = joints[p].parent
    roots = [j for j in joints if j.parent is None]
    if len(roots) != 1:
        raise TopologyError(f"expected exactly one parentless joint, found {len(roots)}")
    if roots[0].id != 0 or roots[0].dof_class is not DofClass.ROOT:
        raise TopologyError("joint 0 must be the Root joint and have no parent")
    for j in joints[1:]:
        if j.dof_class is DofClass.ROOT:
            raise TopologyError(f"joint {j.id} ({j.name}): only one Root joint is allowed")
        if j.parent >= j.id:
            raise TopologyError(f"joint {j.id} ({j.name}) listed before its parent {j.parent}")
        if not lengths[j.id] > 0:
            raise TopologyError(f"joint {j.id} ({j.name}) has nonpositive bone length")
    for j in joints:
        d = np.asarray(j.rest_direction, dtype=float)
        if d.shape != (3,) or abs(np.linalg.norm(d) - 1.0) > UNIT_TOL:
            raise TopologyError(f"joint {j.id} ({j.name}): rest_direction must be a unit 3-vector")
        if j.weight < 0:
            raise TopologyError(f"joint {j.id} ({j.name}): negative weight")
        if j.dof_class is DofClass.THREE_D and j.reference_child is None:
            raise TopologyError(f"ThreeD joint {j.id} ({j.name}) is missing reference_child")
        if j.reference_child is not None:
            rc = j.reference_child
            if not (0 <= rc < n) or joints[rc].parent != j.id:
                raise TopologyError(
                    f"joint {j.id} ({j.name}): reference_child {rc} is not one of its children"
                )
        if j.pitch_axis is not None:
            a = np.asarray(j.pitch_axis, dtype=float)
            if a.shape != (3,) or abs(np.linalg.norm(a) - 1.0) > UNIT_TOL:
                raise TopologyError(f"joint {j.id} ({j.name}): pitch_axis must be a unit 3-vector")
            if abs(a @ d) > 1e-9:
                raise TopologyError(
                    f"joint {j.id} ({j.name}): pitch_axis must be perpendicular to rest_direction"
                )


def topology_from_dict(doc: Mapping[str, Any]) -> SkeletonTopology:
    try:
        records = list(doc["joints"])
    except (KeyError, TypeError) as exc:
        raise TopologyError("topology document needs a 'joints' list") from exc
    joints, lengths = [], []
    for rec in records:
        try:
            joints.append(
                JointSpec(
                    id=int(rec["id"]),
                    name=str(rec["name"]),
                    parent=None if rec.get("parent") is None else int(rec["parent"]),
                    dof_class=DofClass(rec["dof_class"]),
                    rest_direction=tuple(float(x) for x in rec["rest_direction"]),
                    reference_child=(
                        None if rec.get("reference_child") is None else int(rec["reference_child"])
                    ),
                    weight=float(rec.get("weight", 1.0)),
                    pitch_axis=(
                        None
                        if rec.get("pitch_axis") is None
                        else tuple(float(x) for x in rec["pitch_axis"])
                    ),
                )
            )
            lengths.append(float(rec.get("bone_length", 0.0)))
        except (KeyError, ValueError, TypeError) as exc:
            raise TopologyError(f"bad joint record {rec!r}: {exc}") from exc
    order = sorted(range(len(joints)), key=lambda i: joints[i].id)
    return SkeletonTopology(
        joints=tuple(joints[i] for i in order),
        bone_lengths=np.array([lengths[i] for i in order]),
        name=str(doc.get("name", "skeleton")),
    )


def topology_to_dict(topology: SkeletonTopology) -> dict:
    out = []
    for j in topology.joints:
        rec = {
            "id": j.id,
            "name": j.name,
            "parent": j.parent,
            "dof_class": j.dof_class.value,
            "reference_child": j.reference_child,
            "weight": j.weight,
            "rest_direction": list(j.rest_direction),
            "bone_length": float(topology.bone_lengths[j.id]),
        }
        if j.pitch_axis is not None:
            rec["pitch_axis"] = list(j.pitch_axis)
        out.append(rec)
    return {"name": topology.name, "joints": out}


def load_topology(source: str | PathLike | Mapping[str, Any]) -> SkeletonTopology:
    """Load a topology from a mapping, a JSON path, or JSON text."""
    if isinstance(source, Mapping):
        return topology_from_dict(source)
    text = str(source)
    if isinstance(source, PathLike) or not text.lstrip().startswith("{"):
        path = Path(source)
        if not path.exists():
            raise TopologyError(f"topology file not found: {path}")
        text = path.read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TopologyError(f"topology document does not parse: {exc}") from exc
    return topology_from_dict(doc)


def default_topology() -> SkeletonTopology:
    """The bundled 53-joint whole-body configuration."""
    text = resources.files("skelforge.data").joinpath("default_topology.json").read_text("utf-8")
    return load_topology(json.loads(text))


@dataclass(frozen=True)
class CoordinatePose:
    positions: np.ndarray  # (J, 3) meters, world frame

    def __post_init__(self):
        p = np.asarray(self.positions, dtype=float)
        if p.ndim != 2 or p.shape[1] != 3:
            raise ValidationError(f"positions must have shape (J, 3), got {p.shape}")
        if not np.all(np.isfinite(p)):
            raise ValidationError("positions contain non-finite values")
        object.__setattr__(self, "positions", p)


@dataclass(frozen=True)
class CoordinateSequence:
    fps: float
    positions: np.ndarray  # (F, J, 3)

    def __post_init__(self):
        p = np.asarray(self.positions, dtype=float)
        if p.ndim != 3 or p.shape[2] != 3 or p.shape[0] < 1:
            raise ValidationError(f"positions must have shape (F>=1, J, 3), got {p.shape}")
        if not self.fps > 0:
            raise ValidationError("fps must be positive")
        bad = np.argwhere(~np.isfinite(p))
        if len(bad):
            f, j, _ = bad[0]
            raise ValidationError(f"non-finite coordinate at frame {f}, joint {j}")
        object.__setattr__(self, "positions", p)

    @property
    def num_frames(self) -> int:
        return self.positions.shape[0]

    @property
    def frames(self) -> list[CoordinatePose]:
        return [CoordinatePose(p) for p in self.positions]

    def __len__(self):
        return self.num_frames


def _check_pose(pose: CoordinatePose, topology: SkeletonTopology) -> np.ndarray:
    p = pose.positions
    if p.shape[0] != topology.num_joints:
        raise ValidationError(
            f"pose has {p.shape[0]} joints, topology has {topology.num_joints}"
        )
    return p


def bone_vector(pose: CoordinatePose, joint: int, topology: SkeletonTopology) -> np.ndarray:
    """``position(joint) - position(parent(joint))``."""
    p = _check_pose(pose, topology)
    parent = topology.joints[joint].parent
    if parent is None:
        raise ValidationError(f"joint {joint} is the root and has no bone")
    return p[joint] - p[parent]


def measure_bone_lengths(pose: CoordinatePose, topology: SkeletonTopology) -> np.ndarray:
    p = _check_pose(pose, topology)
    parents = topology.parents
    lengths = np.zeros(topology.num_joints)
    lengths[1:] = np.linalg.norm(p[1:] - p[parents[1:]], axis=-1)
    bad = np.flatnonzero(lengths[1:] < DEGENERATE_BONE) + 1
    if len(bad):
        j = int(bad[0])
        raise DegenerateBoneError(f"bone of joint {j} ({topology.joints[j].name}) has zero length")
    return lengths


def rest_pose(topology: SkeletonTopology, root_position=(0.0, 0.0, 0.0)) -> CoordinatePose:
    offsets = topology.rest_offsets
    pos = np.zeros_like(offsets)
    pos[0] = root_position
    for j in topology.joints[1:]:
        pos[j.id] = pos[j.parent] + offsets[j.id]
    return CoordinatePose(pos)


def fk_arrays(topology: SkeletonTopology, rotations, root_positions) -> tuple[np.ndarray, np.ndarray]:
    """Forward kinematics over arbitrary leading dimensions.

    ``rotations`` has shape ``(..., J, 4)``, ``root_positions`` ``(..., 3)``.
    Returns world positions ``(..., J, 3)`` and world orientations ``(..., J, 4)``.
    """
    rotations = np.asarray(rotations, dtype=float)
    root_positions = np.asarray(root_positions, dtype=float)
    J = topology.num_joints
    if rotations.shape[-2:] != (J, 4):
        raise ValidationError(f"expected rotations of shape (..., {J}, 4), got {rotations.shape}")
    norms = np.linalg.norm(rotations, axis=-1)
    if np.any(np.abs(norms - 1.0) > QUAT_UNIT_TOL):
        raise ValidationError("local rotations must be unit quaternions")
    offsets = topology.rest_offsets
    world = np.empty_like(rotations)
    pos = np.empty(rotations.shape[:-1] + (3,))
    world[..., 0, :] = rotations[..., 0, :]
    pos[..., 0, :] = root_positions
    for j in topology.joints[1:]:
        world[..., j.id, :] = quat_mul(world[..., j.parent, :], rotations[..., j.id, :])
        pos[..., j.id, :] = pos[..., j.parent, :] + quat_rotate(world[..., j.id, :], offsets[j.id])
    return pos, world


def forward_kinematics(topology: SkeletonTopology, rotations, root_position) -> CoordinatePose:
    """Place every joint from per-joint local unit quaternions and a root position."""
    pos, _ = fk_arrays(topology, rotations, root_position)
    if pos.ndim != 2:
        raise ValidationError("forward_kinematics takes a single pose; use fk_arrays for batches")
    return CoordinatePose(pos)

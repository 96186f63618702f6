"""JSON file formats for every intermediate artifact.

Floats are written with ``repr`` precision, so a write/read round trip is
exact and stages chained through files match an in-memory run bit for bit.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .camera import CameraTrajectory
from .dsi import AnimationSet
from .errors import ValidationError
from .rotation import RotationSequence
from .skeleton import CoordinateSequence, SkeletonTopology

INDEX_NAME = "index.json"


def read_json(path):
    path = Path(path)
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ValidationError(f"file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path} is not valid JSON: {exc}") from exc


def write_json(doc, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(json.dumps(doc, indent=1) + "\n")
    return path


def _check_names(names, topology: SkeletonTopology | None, what: str):
    if topology is not None and names is not None and list(names) != topology.names:
        raise ValidationError(f"{what}: joint_names do not match the topology order")


def coordinates_from_dict(doc, topology: SkeletonTopology | None = None) -> CoordinateSequence:
    try:
        fps = float(doc["fps"])
        names = doc.get("joint_names")
        frames = doc["frames"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"coordinate document needs fps and frames: {exc}") from exc
    try:
        pos = np.array(frames, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"frames must be a rectangular list of [x, y, z]: {exc}") from exc
    if pos.ndim != 3 or pos.shape[2] != 3:
        raise ValidationError(f"frames must have shape (F, J, 3), got {pos.shape}")
    if names is not None and len(names) != pos.shape[1]:
        raise ValidationError("joint_names length does not match the frames")
    _check_names(names, topology, "coordinate file")
    return CoordinateSequence(fps, pos)


def parse_coordinate_file(path, topology: SkeletonTopology | None = None) -> CoordinateSequence:
    """Read ``{fps, joint_names, frames}`` with positions in meters."""
    try:
        return coordinates_from_dict(read_json(path), topology)
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from exc


def write_coordinate_file(seq: CoordinateSequence, path, joint_names=None) -> Path:
    doc = {"fps": seq.fps, "joint_names": None if joint_names is None else list(joint_names)}
    doc["frames"] = seq.positions.tolist()
    return write_json(doc, path)


def rotation_to_dict(seq: RotationSequence) -> dict:
    q = seq.quaternions.transpose(1, 0, 2)
    return {
        "fps": seq.fps,
        "joint_names": None if seq.joint_names is None else list(seq.joint_names),
        "frames": [
            {"root_position": r.tolist(), "quaternions": qf.tolist()} for r, qf in zip(seq.root_positions, q)
        ],
    }


def rotation_from_dict(doc, topology: SkeletonTopology | None = None) -> RotationSequence:
    try:
        fps = float(doc["fps"])
        names = doc.get("joint_names")
        roots = np.array([f["root_position"] for f in doc["frames"]], dtype=float)
        q = np.array([f["quaternions"] for f in doc["frames"]], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed rotation document: {exc}") from exc
    if q.ndim != 3 or q.shape[2] != 4:
        raise ValidationError(f"quaternions must have shape (F, J, 4), got {q.shape}")
    _check_names(names, topology, "rotation file")
    return RotationSequence(fps, roots, q.transpose(1, 0, 2).copy(), names)


def read_rotation_file(path, topology: SkeletonTopology | None = None) -> RotationSequence:
    return rotation_from_dict(read_json(path), topology)


def write_rotation_file(seq: RotationSequence, path) -> Path:
    return write_json(rotation_to_dict(seq), path)


def write_animation_set(anim: AnimationSet, directory) -> Path:
    """One rotation file per variant plus an index listing variant seeds."""
    directory = Path(directory)
    entries = []
    for v in range(anim.num_variants):
        name = f"variant_{v:02d}.json"
        write_rotation_file(anim.variant(v), directory / name)
        entries.append({"file": name, "seed": anim.seeds[v] if v < len(anim.seeds) else None})
    return write_json({"fps": anim.fps, "variants": entries}, directory / INDEX_NAME)


def read_animation_set(directory, topology: SkeletonTopology | None = None) -> AnimationSet:
    directory = Path(directory)
    index = read_json(directory / INDEX_NAME)
    try:
        entries = index["variants"]
        seqs = [read_rotation_file(directory / e["file"], topology) for e in entries]
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed animation index in {directory}: {exc}") from exc
    return AnimationSet.from_sequences(seqs, tuple(e.get("seed") for e in entries))


def read_trajectory_file(path) -> CameraTrajectory:
    return CameraTrajectory.from_dict(read_json(path))


def write_trajectory_file(traj: CameraTrajectory, path) -> Path:
    return write_json(traj.to_dict(), path)

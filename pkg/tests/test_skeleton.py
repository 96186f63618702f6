from __future__ import annotations

import copy
from collections import Counter

import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from skelforge.errors import DegenerateBoneError, TopologyError, ValidationError
from skelforge.skeleton import (
    CoordinatePose,
    CoordinateSequence,
    DofClass,
    bone_vector,
    fk_arrays,
    forward_kinematics,
    load_topology,
    measure_bone_lengths,
    rest_pose,
    topology_to_dict,
)


def test_default_body_layout(body):
    assert body.num_joints == 53
    counts = Counter(j.dof_class for j in body.joints)
    assert counts[DofClass.ROOT] == 1
    assert sum(counts.values()) == 53
    assert len(set(body.names)) == 53
    # every ThreeD joint can recover roll from its reference child
    for j in body.joints:
        if j.dof_class is DofClass.THREE_D:
            assert body.reference_rest_direction(j.id) is not None


def test_topology_dict_round_trip(body):
    again = load_topology(topology_to_dict(body))
    assert again.names == body.names
    assert np.array_equal(again.bone_lengths, body.bone_lengths)
    assert np.array_equal(again.rest_directions, body.rest_directions)
    assert [j.dof_class for j in again.joints] == [j.dof_class for j in body.joints]


def _toy_doc(toy):
    return copy.deepcopy(topology_to_dict(toy))


@pytest.mark.parametrize(
    "mutate, message",
    [
        (lambda d: d["joints"][2].update(parent=4), "before its parent"),
        (lambda d: d["joints"][1].update(parent=None), "parentless"),
        (lambda d: d["joints"][2].update(rest_direction=[0, 0, -2]), "unit"),
        (lambda d: d["joints"][2].update(bone_length=0.0), "nonpositive"),
        (lambda d: d["joints"][2].update(dof_class="ThreeD"), "reference_child"),
        (lambda d: d["joints"][0].update(reference_child=2), "not one of its children"),
        (lambda d: d["joints"][3].update(id=1), "duplicate"),
        (lambda d: d["joints"][2].update(dof_class="OneD", pitch_axis=[0, 0, 1]), "perpendicular"),
        (lambda d: d["joints"][2].update(weight=-1.0), "negative weight"),
    ],
)
def test_topology_rejects(toy, mutate, message):
    doc = _toy_doc(toy)
    mutate(doc)
    with pytest.raises(TopologyError, match=message):
        load_topology(doc)


def test_load_missing_file(tmp_path):
    with pytest.raises(TopologyError, match="not found"):
        load_topology(tmp_path / "nope.json")


def test_rest_pose_and_bone_vectors(toy):
    pose = rest_pose(toy, (0.0, 0.0, 0.9))
    assert np.allclose(pose.positions[2], [0.0, 0.1, 0.0])
    assert np.allclose(bone_vector(pose, 2, toy), [0.0, 0.0, -0.9])
    assert np.allclose(measure_bone_lengths(pose, toy), toy.bone_lengths)
    with pytest.raises(ValidationError):
        bone_vector(pose, 0, toy)


def test_degenerate_bone_is_named(toy):
    p = rest_pose(toy).positions.copy()
    p[4] = p[3]
    with pytest.raises(DegenerateBoneError, match="r_leg"):
        measure_bone_lengths(CoordinatePose(p), toy)


def test_fk_identity_is_rest_pose(body):
    q = np.zeros((body.num_joints, 4))
    q[:, 3] = 1.0
    pose = forward_kinematics(body, q, [0.1, 0.2, 0.3])
    assert np.allclose(pose.positions, rest_pose(body, (0.1, 0.2, 0.3)).positions)


def test_fk_matches_matrix_chain(toy, rng):
    # oracle: compose homogeneous transforms parent to child
    local = Rotation.random(toy.num_joints, random_state=5)
    root = rng.normal(size=3)
    pos, _ = fk_arrays(toy, local.as_quat(), root)
    T = [None] * toy.num_joints
    T[0] = np.eye(4)
    T[0][:3, :3] = local[0].as_matrix()
    T[0][:3, 3] = root
    for j in toy.joints[1:]:
        R = T[j.parent][:3, :3] @ local[j.id].as_matrix()
        t = T[j.parent][:3, 3] + R @ (np.array(j.rest_direction) * toy.bone_lengths[j.id])
        T[j.id] = np.eye(4)
        T[j.id][:3, :3], T[j.id][:3, 3] = R, t
    assert np.allclose(pos, [t[:3, 3] for t in T], atol=1e-12)


def test_fk_preserves_bone_lengths(body, rng):
    q = Rotation.random(body.num_joints, random_state=9).as_quat()
    pose = forward_kinematics(body, q, rng.normal(size=3))
    assert np.allclose(measure_bone_lengths(pose, body)[1:], body.bone_lengths[1:])


def test_fk_batches(toy):
    q = Rotation.random(3 * toy.num_joints, random_state=1).as_quat().reshape(3, toy.num_joints, 4)
    roots = np.arange(9.0).reshape(3, 3)
    pos, world = fk_arrays(toy, q, roots)
    assert pos.shape == (3, toy.num_joints, 3) and world.shape == (3, toy.num_joints, 4)
    assert np.allclose(pos[1], forward_kinematics(toy, q[1], roots[1]).positions)


def test_fk_rejects_non_unit(toy):
    q = np.zeros((toy.num_joints, 4))
    q[:, 3] = 1.1
    with pytest.raises(ValidationError, match="unit"):
        forward_kinematics(toy, q, [0, 0, 0])


def test_coordinate_sequence_names_bad_sample():
    p = np.zeros((4, 2, 3))
    p[2, 1, 0] = np.nan
    with pytest.raises(ValidationError, match="frame 2, joint 1"):
        CoordinateSequence(30.0, p)
    seq = CoordinateSequence(30.0, np.zeros((1, 2, 3)))
    assert seq.num_frames == 1 and seq.frames[0].positions.shape == (2, 3)

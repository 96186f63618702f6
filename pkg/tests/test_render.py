from __future__ import annotations

import hashlib

import numpy as np
import pytest

from skelforge.camera import CameraPose, CameraTrajectory, look_at_orientation, rcm_trajectory, RcmParams
from skelforge.errors import ValidationError
from skelforge.render import (
    BACKGROUND,
    CameraIntrinsics,
    project,
    project_points,
    read_ppm,
    render_clip,
    render_frame,
    write_clip,
)
from skelforge.rotation import RotationSequence
from skelforge.skeleton import CoordinatePose, CoordinateSequence, forward_kinematics, rest_pose

INTR = CameraIntrinsics()


def matrix_oracle(points, pose, intr):
    # P = K [R | -R c] with image rows (right, -up, forward)
    right, up, fwd = look_at_orientation(pose)
    R = np.stack([right, -up, fwd])
    P = intr.matrix() @ np.hstack([R, -(R @ pose.position)[:, None]])
    h = np.hstack([points, np.ones((len(points), 1))]) @ P.T
    return h[:, :2] / h[:, 2:]


def test_intrinsics_defaults_and_validation():
    assert INTR.principal_point == (320.0, 240.0)
    assert (INTR.width, INTR.height, INTR.focal_px) == (640, 480, 500.0)
    assert CameraIntrinsics.from_dict({"width": 100, "height": 50}).principal_point == (50.0, 25.0)
    with pytest.raises(ValidationError):
        CameraIntrinsics(focal_px=0)
    with pytest.raises(ValidationError):
        CameraIntrinsics(cx=700)


def test_optical_axis_hits_principal_point():
    pose = CameraPose([0, 0, 0], [3, 0, 0])
    for depth in (0.1, 1.0, 50.0):
        assert np.allclose(project([depth, 0, 0], pose, INTR), (320, 240))


def test_similar_triangles():
    pose = CameraPose([0, 0, 0], [1, 0, 0])
    # right of the camera is -y when looking down +x with z up
    u, v = project([4.0, -0.5, 0.25], pose, INTR)
    assert u == pytest.approx(320 + 500 * 0.5 / 4.0)
    assert v == pytest.approx(240 - 500 * 0.25 / 4.0)


def test_behind_camera():
    pose = CameraPose([0, 0, 0], [1, 0, 0])
    assert project([-1, 0, 0], pose, INTR) is None
    assert project([0, 5, 0], pose, INTR) is None


def test_projection_matches_matrix_oracle(rng):
    for _ in range(20):
        pose = CameraPose(rng.normal(size=3) * 4, rng.normal(size=3))
        pts = rng.normal(size=(50, 3)) * 3
        uv, front = project_points(pts, pose, INTR)
        oracle = matrix_oracle(pts[front], pose, INTR)
        assert np.abs(uv[front] - oracle).max() < 1e-6
        assert np.all(np.isnan(uv[~front]))


def test_character_in_view(body):
    pose = rest_pose(body, (0, 0, 1.0))
    cam = CameraPose([-4.0, 0.0, 1.0], [0, 0, 1.0])
    uv, front = project_points(pose.positions, cam, INTR)
    assert front.all()
    assert np.all((uv >= 0) & (uv < [INTR.width, INTR.height]))
    frame = render_frame(pose, body, cam, INTR)
    assert not frame.blank
    assert len(frame.buffer) == 640 * 480 * 3
    assert (frame.pixels != BACKGROUND).any(axis=-1).sum() > 200


def test_camera_facing_away_is_blank(toy):
    cam = CameraPose([5.0, 0, 1], [10.0, 0, 1])
    frame = render_frame(rest_pose(toy, (0, 0, 1)), toy, cam, INTR)
    assert frame.blank
    assert np.all(frame.pixels == BACKGROUND)


def test_bone_crossing_near_plane_is_clipped(toy):
    # camera between the hips: half of the skeleton is behind it
    cam = CameraPose([0.0, 0.05, 1.0], [0.0, 0.05, 0.0], up_hint=[1.0, 0.0, 0.0])
    frame = render_frame(rest_pose(toy, (0, 0, 1)), toy, cam, CameraIntrinsics(width=64, height=48, cx=32, cy=24))
    assert not frame.blank


def test_rendering_is_deterministic(body):
    pose = rest_pose(body, (0, 0, 1))
    cam = CameraPose([-3.0, 1.0, 1.5], [0, 0, 1])
    a = render_frame(pose, body, cam, INTR).buffer
    b = render_frame(pose, body, cam, INTR).buffer
    assert a == b


def test_clip_schedule(toy):
    p = np.stack([rest_pose(toy, (0.01 * f, 0, 1)).positions for f in range(10)])
    seq = CoordinateSequence(30.0, p)
    cams = (CameraPose([-3, 0, 1], [0, 0, 1]), CameraPose([0, -3, 1], [0, 0, 1]))
    one = render_clip(seq, toy, CameraTrajectory(cams[:1], (10,)), INTR)
    assert len(one) == 10
    two = render_clip(seq, toy, CameraTrajectory(cams, (5, 5)), INTR)
    for f in range(10):
        solo = render_frame(CoordinatePose(p[f]), toy, cams[f // 5], INTR)
        assert two[f].buffer == solo.buffer


def test_clip_from_rotations_matches_fk(toy):
    q = np.zeros((toy.num_joints, 3, 4))
    q[..., 3] = 1
    seq = RotationSequence(30.0, np.array([[0, 0, 1.0]] * 3), q)
    traj = rcm_trajectory([0, 0, 1], RcmParams(moves=2, hold_frames=1, seed=1))
    frames = render_clip(seq, toy, traj, INTR)
    ref = forward_kinematics(toy, q[:, 1], [0, 0, 1])
    assert frames[1].buffer == render_frame(ref, toy, traj.poses[1], INTR).buffer


def test_ppm_files_round_trip(tmp_path, toy):
    pose = rest_pose(toy, (0, 0, 1))
    frame = render_frame(pose, toy, CameraPose([-3, 0, 1], [0, 0, 1]), INTR)
    paths = write_clip([frame, frame], tmp_path / "clip")
    assert [p.name for p in paths] == ["frame_000000.ppm", "frame_000001.ppm"]
    assert paths[0].read_bytes().startswith(b"P6\n640 480\n255\n")
    back = read_ppm(paths[1])
    assert back.buffer == frame.buffer
    h1 = hashlib.sha256(paths[0].read_bytes()).hexdigest()
    write_clip([frame], tmp_path / "again")
    assert hashlib.sha256((tmp_path / "again" / "frame_000000.ppm").read_bytes()).hexdigest() == h1


def test_png_output(tmp_path, toy):
    frame = render_frame(rest_pose(toy, (0, 0, 1)), toy, CameraPose([-3, 0, 1], [0, 0, 1]), INTR)
    paths = write_clip([frame], tmp_path, fmt="png")
    assert paths[0].suffix == ".png" and paths[0].stat().st_size > 0
    with pytest.raises(ValidationError):
        write_clip([frame], tmp_path, fmt="gif")

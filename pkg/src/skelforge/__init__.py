"""Coordinate skeletons to rotation animations, resampled variants, camera paths and labelled clips."""
from __future__ import annotations

from .camera import CameraPose, CameraTrajectory, RcmParams, look_at_orientation, rcm_step, rcm_trajectory
from .dataset import (
    ClipManifest,
    ClipRecord,
    RecordingPlan,
    build_plan,
    execute_plan,
    read_manifest,
    write_manifest,
)
from .dsi import (
    AnimationSet,
    DsiParams,
    angular_distance,
    dsi_interpolate,
    dsi_pipeline,
    lagrange_interpolate,
    linespace,
    random_variants,
    segment,
)
from .errors import SkelforgeError, StageError, ValidationError
from .render import CameraIntrinsics, RasterFrame, project, render_clip, render_frame
from .rotation import (
    RotationPose,
    RotationSequence,
    euler_from_vectors,
    euler_to_quaternion,
    pose_to_rotation,
    quaternion_world_to_local,
    sequence_to_rotation,
)
from .skeleton import (
    CoordinatePose,
    CoordinateSequence,
    DofClass,
    JointSpec,
    SkeletonTopology,
    bone_vector,
    default_topology,
    forward_kinematics,
    load_topology,
)
from .supersmoother import supersmooth

__version__ = "0.1.0"

__all__ = [
    "CameraPose",
    "CameraTrajectory",
    "RcmParams",
    "look_at_orientation",
    "rcm_step",
    "rcm_trajectory",
    "ClipManifest",
    "ClipRecord",
    "RecordingPlan",
    "build_plan",
    "execute_plan",
    "read_manifest",
    "write_manifest",
    "AnimationSet",
    "DsiParams",
    "angular_distance",
    "dsi_interpolate",
    "dsi_pipeline",
    "lagrange_interpolate",
    "linespace",
    "random_variants",
    "segment",
    "SkelforgeError",
    "StageError",
    "ValidationError",
    "CameraIntrinsics",
    "RasterFrame",
    "project",
    "render_clip",
    "render_frame",
    "RotationPose",
    "RotationSequence",
    "euler_from_vectors",
    "euler_to_quaternion",
    "pose_to_rotation",
    "quaternion_world_to_local",
    "sequence_to_rotation",
    "CoordinatePose",
    "CoordinateSequence",
    "DofClass",
    "JointSpec",
    "SkeletonTopology",
    "bone_vector",
    "default_topology",
    "forward_kinematics",
    "load_topology",
    "supersmooth",
]

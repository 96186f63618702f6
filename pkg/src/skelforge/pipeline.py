"""End-to-end orchestration with file intermediates between stages.

Every stage reads what the previous stage wrote to disk, so running the
stages one by one from the command line produces the same bytes as
:func:`run_pipeline`. All randomness flows from one run seed through
:func:`~skelforge.seeding.derive_seed`.
"""
from __future__ import annotations

import json
import shutil
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

from .camera import RcmParams, rcm_trajectory
from .dataset import ClipManifest, build_plan, execute_plan, write_manifest
from .dsi import AnimationSet, DsiParams, dsi_interpolate, random_variants, smooth_set
from .errors import StageError, ValidationError
from .io import (
    parse_coordinate_file,
    read_animation_set,
    read_json,
    read_rotation_file,
    read_trajectory_file,
    write_animation_set,
    write_json,
    write_rotation_file,
    write_trajectory_file,
)
from .render import CameraIntrinsics
from .rotation import RotationSequence, sequence_to_rotation
from .seeding import derive_seed
from .skeleton import SkeletonTopology, default_topology, load_topology, topology_to_dict

DEFAULT_TOPOLOGY = "default"
STAGING = ".staging"
QUARANTINE = "quarantine"
TOPOLOGY_COPY = "topology.json"


@dataclass(frozen=True)
class PipelineConfig:
    topology: str
    plan: Path
    inputs: dict[str, Path]
    output: Path
    seed: int = 0
    dsi: DsiParams = field(default_factory=DsiParams)
    rcm: RcmParams = field(default_factory=RcmParams)
    intrinsics: CameraIntrinsics = field(default_factory=CameraIntrinsics)
    image_format: str = "ppm"

    @classmethod
    def from_dict(cls, doc: dict, base_dir=".", seed: int | None = None) -> "PipelineConfig":
        """Build and validate a config; relative paths resolve against ``base_dir``.

        ``seed`` (from the command line) overrides the document's seed.
        """
        base = Path(base_dir)
        known = {"topology", "plan", "inputs", "output", "seed", "dsi", "camera", "intrinsics", "image_format"}
        unknown = set(doc) - known
        if unknown:
            raise ValidationError(f"unknown config field(s): {sorted(unknown)}")
        for key in ("plan", "output"):
            if key not in doc:
                raise ValidationError(f"config needs '{key}'")
        topo = doc.get("topology", DEFAULT_TOPOLOGY)
        if topo != DEFAULT_TOPOLOGY:
            topo = str(base / topo)
            if not Path(topo).is_file():
                raise ValidationError(f"topology file not found: {topo}")
        plan_path = base / doc["plan"]
        if not plan_path.is_file():
            raise ValidationError(f"plan file not found: {plan_path}")
        plan = build_plan(read_json(plan_path))
        inputs = {k: base / v for k, v in dict(doc.get("inputs", {})).items()}
        for aid, entry in plan.animations.items():
            if aid not in inputs and entry.source is not None:
                inputs[aid] = plan_path.parent / entry.source
            if aid not in inputs:
                raise ValidationError(f"no input sequence for animation {aid!r}")
            if not inputs[aid].is_file():
                raise ValidationError(f"input sequence not found: {inputs[aid]}")
        fmt = doc.get("image_format", "ppm")
        if fmt not in ("ppm", "png"):
            raise ValidationError(f"unsupported image format {fmt!r}")
        return cls(
            topology=topo,
            plan=plan_path,
            inputs=inputs,
            output=base / doc["output"],
            seed=int(doc.get("seed", 0) if seed is None else seed),
            dsi=DsiParams.from_dict(doc.get("dsi", {})),
            rcm=RcmParams.from_dict(doc.get("camera", {})),
            intrinsics=CameraIntrinsics.from_dict(doc.get("intrinsics", {})),
            image_format=fmt,
        )

    @classmethod
    def load(cls, path, seed: int | None = None) -> "PipelineConfig":
        path = Path(path)
        return cls.from_dict(read_json(path), path.parent, seed)


def resolve_topology(source) -> SkeletonTopology:
    if source is None or source == DEFAULT_TOPOLOGY:
        return default_topology()
    return load_topology(Path(source))


def dsi_params_for(base: DsiParams, seed: int, animation_id: str, variants: int | None = None) -> DsiParams:
    v = base.variants if variants is None else variants
    return replace(base, seed=derive_seed(seed, "dsi", animation_id), variants=v)


def rcm_params_for(base: RcmParams, seed: int, animation_id: str, viewpoint: int) -> RcmParams:
    return replace(base, seed=derive_seed(seed, "camera", animation_id, viewpoint))


def camera_origin(seq: RotationSequence):
    """The character's position at the first frame."""
    return seq.root_positions[0]


# single-stage helpers shared with the command line


def convert_file(topology: SkeletonTopology, src, dst) -> RotationSequence:
    seq = sequence_to_rotation(topology, parse_coordinate_file(src, topology))
    seq = RotationSequence(seq.fps, seq.root_positions, seq.quaternions, tuple(topology.names))
    write_rotation_file(seq, dst)
    return seq


def interpolate_file(topology: SkeletonTopology, params: DsiParams, src, dst) -> RotationSequence:
    out = dsi_interpolate(read_rotation_file(src, topology), params, topology.weights)
    write_rotation_file(out, dst)
    return out


def variants_file(topology: SkeletonTopology, params: DsiParams, src, dst_dir) -> AnimationSet:
    anim = smooth_set(random_variants(read_rotation_file(src, topology), params), params.spans)
    write_animation_set(anim, dst_dir)
    return anim


def camera_file(origin, params: RcmParams, dst):
    traj = rcm_trajectory(origin, params)
    write_trajectory_file(traj, dst)
    return traj


def trajectory_name(animation_id: str, viewpoint: int) -> str:
    return f"{animation_id}_cam{viewpoint:02d}.json"


def build_from_files(plan_path, topology, animations_dir, cameras_dir, intrinsics, out_root, fmt="ppm") -> ClipManifest:
    plan = build_plan(read_json(plan_path))
    animations, trajectories = {}, {}
    for aid, entry in plan.animations.items():
        animations[aid] = read_animation_set(Path(animations_dir) / aid, topology)
        for k in range(entry.viewpoints):
            trajectories[(aid, k)] = read_trajectory_file(Path(cameras_dir) / trajectory_name(aid, k))
    manifest = execute_plan(plan, animations, trajectories, topology, intrinsics, Path(out_root) / "clips", fmt)
    write_manifest(manifest, Path(out_root) / "manifest.csv")
    return manifest


def _move_contents(src: Path, dst: Path):
    dst.mkdir(parents=True, exist_ok=True)
    for item in sorted(src.iterdir()):
        target = dst / item.name
        if target.is_dir():
            shutil.rmtree(target)
        elif target.exists():
            target.unlink()
        shutil.move(str(item), str(target))


def run_pipeline(config: PipelineConfig) -> tuple[ClipManifest, dict]:
    """Run every stage; on failure partial outputs land in ``output/quarantine``.

    Returns the manifest and a summary with clip counts, frame counts before
    and after interpolation, and per-stage wall time.
    """
    out = Path(config.output)
    stage_dir = out / STAGING
    if stage_dir.exists():
        shutil.rmtree(stage_dir)
    work = stage_dir / "work"
    timing: dict[str, float] = {}
    summary: dict = {"seed": config.seed, "topology": str(config.topology), "dsi": config.dsi.to_dict(), "animations": {}}
    stage = "setup"

    def tick(name):
        nonlocal stage, t0
        now = time.perf_counter()
        timing[stage] = timing.get(stage, 0.0) + now - t0
        stage, t0 = name, now

    t0 = time.perf_counter()
    try:
        topology = resolve_topology(config.topology)
        # keep the topology with the run so reports do not depend on the caller's cwd
        write_json(topology_to_dict(topology), work / TOPOLOGY_COPY)
        plan = build_plan(read_json(config.plan))
        for aid, entry in plan.animations.items():
            tick("convert")
            rot_path = work / "rotations" / f"{aid}.json"
            seq = convert_file(topology, config.inputs[aid], rot_path)
            tick("interpolate")
            params = dsi_params_for(config.dsi, config.seed, aid, entry.variants)
            interp_path = work / "interpolated" / f"{aid}.json"
            interp = interpolate_file(topology, params, rot_path, interp_path)
            tick("variants")
            variants_file(topology, params, interp_path, work / "animations" / aid)
            tick("camera")
            for k in range(entry.viewpoints):
                rcm = rcm_params_for(config.rcm, config.seed, aid, k)
                camera_file(camera_origin(seq), rcm, work / "cameras" / trajectory_name(aid, k))
            summary["animations"][aid] = {
                "frames_in": seq.num_frames,
                "frames_out": interp.num_frames,
                "fps_in": seq.fps,
                "fps_out": interp.fps,
                "variants": entry.variants,
                "viewpoints": entry.viewpoints,
            }
        tick("build")
        manifest = build_from_files(
            config.plan, topology, work / "animations", work / "cameras", config.intrinsics, stage_dir, config.image_format
        )
        tick("done")
    except Exception as exc:
        quarantine = out / QUARANTINE
        if quarantine.exists():
            shutil.rmtree(quarantine)
        if stage_dir.exists():
            shutil.move(str(stage_dir), str(quarantine))
        raise StageError(stage, exc) from exc
    _move_contents(stage_dir, out)
    stage_dir.rmdir()
    summary["clips"] = len(manifest)
    summary["timing_s"] = {k: round(v, 4) for k, v in timing.items() if k != "setup"}
    with open(out / "summary.json", "w", encoding="utf-8", newline="") as fh:
        fh.write(json.dumps(summary, indent=1) + "\n")
    return manifest, summary

"""Command line entry point: ``skelforge <command> ...``.

Each command runs one pipeline stage on files, and ``run`` chains them all
from a config document. Flags given on the command line override fields of
parameter documents, which override built-in defaults.

Exit status is 0 on success, 1 for invalid input and 2 for other failures.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .camera import RcmParams
from .dsi import DsiParams
from .errors import SkelforgeError, ValidationError
from .io import read_json, read_rotation_file, read_trajectory_file
from .pipeline import (
    PipelineConfig,
    build_from_files,
    camera_file,
    camera_origin,
    convert_file,
    dsi_params_for,
    interpolate_file,
    rcm_params_for,
    resolve_topology,
    run_pipeline,
    variants_file,
)
from .render import CameraIntrinsics, render_clip, write_clip

log = logging.getLogger("skelforge")

EXIT_OK, EXIT_VALIDATION, EXIT_RUNTIME = 0, 1, 2


def _vector(text: str):
    try:
        vals = [float(x) for x in text.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected x,y,z but got {text!r}") from exc
    if len(vals) != 3:
        raise argparse.ArgumentTypeError(f"expected x,y,z but got {text!r}")
    return vals


def _seed(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _overrides(args, names) -> dict:
    return {n: getattr(args, n) for n in names if getattr(args, n, None) is not None}


def _dsi_params(args) -> DsiParams:
    doc = read_json(args.params) if args.params else {}
    doc.update(_overrides(args, ("threshold", "delta", "eta", "noise_low", "noise_high")))
    if getattr(args, "count", None) is not None:
        doc["variants"] = args.count
    return DsiParams.from_dict(doc)


def _stage_seed(args, params_seed: int) -> int:
    return args.seed if getattr(args, "seed", None) is not None else params_seed


def cmd_convert(args):
    topo = resolve_topology(args.topology)
    seq = convert_file(topo, args.input, args.out)
    flagged = sum(len(v) for v in seq.roll_fallback.values())
    print(f"converted {seq.num_frames} frames x {seq.num_joints} joints -> {args.out}")
    if flagged:
        print(f"roll fell back to shortest arc on {flagged} joint-frames")


def cmd_interpolate(args):
    topo = resolve_topology(args.topology)
    src = read_rotation_file(args.input, topo)
    out = interpolate_file(topo, _dsi_params(args), args.input, args.out)
    print(f"interpolated {src.num_frames} -> {out.num_frames} frames (fps {src.fps:g} -> {out.fps:g})")


def cmd_variants(args):
    topo = resolve_topology(args.topology)
    params = _dsi_params(args)
    seed = _stage_seed(args, params.seed)
    if args.animation_id:
        params = dsi_params_for(params, seed, args.animation_id)
    else:
        params = replace(params, seed=seed)
    anim = variants_file(topo, params, args.input, args.out)
    print(f"wrote {anim.num_variants} variants of shape {anim.shape[1:]} -> {args.out}")


def cmd_camera(args):
    doc = read_json(args.params) if args.params else {}
    doc.update(_overrides(args, ("mag_low", "mag_high", "theta_low", "theta_high", "z_low", "z_high", "moves")))
    if args.hold is not None:
        doc["hold_frames"] = args.hold
    params = RcmParams.from_dict(doc)
    seed = _stage_seed(args, params.seed)
    if args.animation_id:
        params = rcm_params_for(params, seed, args.animation_id, args.viewpoint)
    else:
        params = replace(params, seed=seed)
    if args.origin is not None:
        origin = args.origin
    elif args.from_rotation:
        origin = camera_origin(read_rotation_file(args.from_rotation))
    else:
        raise ValidationError("camera needs --origin or --from")
    traj = camera_file(origin, params, args.out)
    print(f"wrote {len(traj)} camera poses -> {args.out}")


def _intrinsics(args) -> CameraIntrinsics:
    doc = read_json(args.intrinsics) if args.intrinsics else {}
    doc.update(_overrides(args, ("width", "height", "focal_px")))
    return CameraIntrinsics.from_dict(doc)


def cmd_render(args):
    topo = resolve_topology(args.topology)
    seq = read_rotation_file(args.input, topo)
    frames = render_clip(seq, topo, read_trajectory_file(args.traj), _intrinsics(args))
    write_clip(frames, args.out, args.format)
    blank = sum(f.blank for f in frames)
    print(f"rendered {len(frames)} frames -> {args.out}" + (f" ({blank} blank)" if blank else ""))


def cmd_build(args):
    topo = resolve_topology(args.topology)
    manifest = build_from_files(args.plan, topo, args.animations, args.cameras, _intrinsics(args), args.out, args.format)
    print(f"built {len(manifest)} clips -> {Path(args.out) / 'manifest.csv'}")


def cmd_run(args):
    config = PipelineConfig.load(args.config, seed=getattr(args, "seed", None))
    if args.out:
        config = replace(config, output=Path(args.out))
    _, summary = run_pipeline(config)
    print(json.dumps(summary, indent=1))


def cmd_report(args):
    from .report import make_report

    for path in make_report(args.run, args.out):
        print(path)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_seed, default=argparse.SUPPRESS, help="run seed (unsigned 64-bit)")
    common.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)

    p = argparse.ArgumentParser(prog="skelforge", parents=[common], description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(func=fn)
        return sp

    def topology(sp):
        sp.add_argument("--topology", default="default", help="topology JSON, or 'default' for the 53-joint body")

    def intrinsics(sp):
        sp.add_argument("--intrinsics", help="intrinsics JSON {focal_px, cx, cy, width, height}")
        sp.add_argument("--width", type=int)
        sp.add_argument("--height", type=int)
        sp.add_argument("--focal-px", dest="focal_px", type=float)
        sp.add_argument("--format", choices=("ppm", "png"), default="ppm")

    def dsi(sp):
        sp.add_argument("--params", help="DSI parameter JSON")
        for flag in ("threshold", "delta", "eta", "noise-low", "noise-high"):
            sp.add_argument(f"--{flag}", dest=flag.replace("-", "_"), type=float)

    sp = add("convert", cmd_convert, "joint coordinates -> local rotations")
    topology(sp)
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--out", required=True)

    sp = add("interpolate", cmd_interpolate, "dynamic resampling of a rotation file")
    topology(sp)
    dsi(sp)
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--out", required=True)

    sp = add("variants", cmd_variants, "noisy smoothed variants of a rotation file")
    topology(sp)
    dsi(sp)
    sp.add_argument("--count", type=int, help="number of variants")
    sp.add_argument("--animation-id", help="derive the variant seed as a full run would for this animation")
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--out", required=True, help="output directory")

    sp = add("camera", cmd_camera, "random camera trajectory")
    sp.add_argument("--params", help="camera parameter JSON")
    sp.add_argument("--origin", type=_vector, help="character position x,y,z")
    sp.add_argument("--from", dest="from_rotation", help="take the origin from a rotation file's first frame")
    for flag in ("mag-low", "mag-high", "theta-low", "theta-high", "z-low", "z-high"):
        sp.add_argument(f"--{flag}", dest=flag.replace("-", "_"), type=float)
    sp.add_argument("--moves", type=int)
    sp.add_argument("--hold", type=int, help="frames per camera position")
    sp.add_argument("--animation-id", help="derive the camera seed as a full run would")
    sp.add_argument("--viewpoint", type=int, default=0)
    sp.add_argument("--out", required=True)

    sp = add("render", cmd_render, "render a rotation file through a trajectory")
    topology(sp)
    intrinsics(sp)
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--traj", required=True)
    sp.add_argument("--out", required=True, help="frame directory")

    sp = add("build", cmd_build, "render every planned clip and write the manifest")
    topology(sp)
    intrinsics(sp)
    sp.add_argument("--plan", required=True)
    sp.add_argument("--animations", required=True, help="directory of per-animation variant sets")
    sp.add_argument("--cameras", required=True, help="directory of trajectory files")
    sp.add_argument("--out", required=True)

    sp = add("run", cmd_run, "full pipeline from a config document")
    sp.add_argument("--config", required=True)
    sp.add_argument("--out", help="override the config's output directory")

    sp = add("report", cmd_report, "figures and CSV tables for a run directory")
    sp.add_argument("--run", required=True, help="run output directory")
    sp.add_argument("--out", required=True)
    return p


def _is_validation(exc) -> bool:
    while exc is not None:
        if isinstance(exc, ValidationError):
            return True
        exc = getattr(exc, "cause", None) or exc.__cause__
    return False


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if getattr(args, "verbose", False) else logging.WARNING)
    try:
        args.func(args)
    except SkelforgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION if _is_validation(exc) else EXIT_RUNTIME
    except Exception as exc:  # noqa: BLE001
        log.debug("unhandled failure", exc_info=True)
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

"""Figures and CSV tables summarizing a pipeline run directory."""
from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .dataset import read_manifest  # noqa: E402
from .dsi import DsiParams, frame_distances, segment  # noqa: E402
from .errors import ValidationError  # noqa: E402
from .io import read_animation_set, read_json, read_rotation_file, read_trajectory_file  # noqa: E402


def _write_csv(path: Path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def make_report(run_dir, out_dir, weights=None) -> list[Path]:
    """Write ``animations.csv``, ``motion.csv`` and two PNG figures.

    ``animations.csv`` lists per-animation frame counts and clip totals;
    ``motion.csv`` holds the frame-to-frame angular distance of each input
    and of variant 0 after processing. The figures plot those profiles with
    the segmentation threshold, and the camera paths seen from above.
    """
    run = Path(run_dir)
    out = Path(out_dir)
    if not (run / "summary.json").is_file():
        raise ValidationError(f"{run} has no summary.json; is it a run directory?")
    out.mkdir(parents=True, exist_ok=True)
    summary = read_json(run / "summary.json")
    params = DsiParams.from_dict(summary.get("dsi", {}))
    if weights is None:
        from .pipeline import TOPOLOGY_COPY, resolve_topology

        copy = run / "work" / TOPOLOGY_COPY
        weights = resolve_topology(copy if copy.is_file() else summary.get("topology")).weights
    manifest = read_manifest(run / "manifest.csv")
    clips_per = {}
    for r in manifest.records:
        clips_per[r.animation_id] = clips_per.get(r.animation_id, 0) + 1

    written = []
    anim_rows, motion_rows = [], []
    fig, ax = plt.subplots(figsize=(8, 3.5))
    fig2, ax2 = plt.subplots(figsize=(5, 5))
    for aid, info in sorted(summary["animations"].items()):
        src = read_rotation_file(run / "work" / "rotations" / f"{aid}.json")
        seg = segment(src, params, weights)
        d_in = seg.distances
        anim = read_animation_set(run / "work" / "animations" / aid)
        d_out = frame_distances(anim.variant(0), weights)
        edges = sum(iv.edge for iv in seg.intervals)
        anim_rows.append(
            [aid, info["frames_in"], info["frames_out"], f"{info['fps_in']:.6g}", f"{info['fps_out']:.6g}",
             edges, clips_per.get(aid, 0)]
        )
        t_in = np.arange(len(d_in)) / src.fps
        t_out = np.arange(len(d_out)) / anim.fps
        motion_rows += [[aid, "input", i, f"{t:.6f}", f"{d:.8f}"] for i, (t, d) in enumerate(zip(t_in, d_in))]
        motion_rows += [[aid, "variant0", i, f"{t:.6f}", f"{d:.8f}"] for i, (t, d) in enumerate(zip(t_out, d_out))]
        ax.plot(t_in[1:], d_in[1:], label=f"{aid} input")
        ax.plot(t_out[1:], d_out[1:], "--", label=f"{aid} variant 0")
        for k in range(info["viewpoints"]):
            traj = read_trajectory_file(run / "work" / "cameras" / f"{aid}_cam{k:02d}.json")
            p = traj.positions
            ax2.plot(p[:, 0], p[:, 1], "o-", ms=3, label=f"{aid} cam{k:02d}")
            ax2.plot(*traj.poses[0].look_at[:2], "k*", ms=10)
    ax.axhline(params.threshold, color="k", lw=0.8, ls=":", label="threshold")
    ax.set_xlabel("time [s]")
    ax.set_ylabel("angular distance [rad]")
    ax.legend(fontsize=7)
    fig.tight_layout()
    ax2.set_aspect("equal")
    ax2.set_xlabel("x [m]")
    ax2.set_ylabel("y [m]")
    ax2.legend(fontsize=7)
    fig2.tight_layout()

    _write_csv(out / "animations.csv",
               ["animation_id", "frames_in", "frames_out", "fps_in", "fps_out", "edge_intervals", "clips"], anim_rows)
    _write_csv(out / "motion.csv", ["animation_id", "series", "frame", "time_s", "angular_distance"], motion_rows)
    written += [out / "animations.csv", out / "motion.csv"]
    for f, name in ((fig, "angular_distance.png"), (fig2, "camera_paths.png")):
        f.savefig(out / name, dpi=100)
        plt.close(f)
        written.append(out / name)
    return written

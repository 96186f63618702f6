"""Hierarchical clip recording and annotation manifests.

A recording plan lists categories, their actions (each with one integer
label) and the animations performed for each action. Every animation is
captured once per (variant, viewpoint) pair into its own directory
``category/action/animation/vNN/camNN``. Because each clip holds exactly one
action from its first frame to its last, the annotation is the whole clip.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import re
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Mapping

from .camera import CameraTrajectory
from .errors import ValidationError
from .render import CameraIntrinsics, render_clip, write_clip

MANIFEST_HEADER = (
    "category",
    "action",
    "animation_id",
    "variant_id",
    "viewpoint_id",
    "clip_path",
    "start_frame",
    "end_frame",
    "label_id",
)
HIERARCHY_DEPTH = 5
_SAFE_NAME = re.compile(r"^[A-Za-z0-9][A-Za-z0-9._-]*$")


@dataclass(frozen=True)
class AnimationEntry:
    animation_id: str
    variants: int
    viewpoints: int
    source: str | None = None


@dataclass(frozen=True)
class ActionEntry:
    name: str
    label_id: int
    animations: tuple[AnimationEntry, ...]


@dataclass(frozen=True)
class CategoryEntry:
    name: str
    actions: tuple[ActionEntry, ...]


@dataclass(frozen=True)
class PlannedClip:
    category: str
    action: str
    animation_id: str
    variant_id: int
    viewpoint_id: int
    label_id: int

    @property
    def clip_path(self) -> str:
        return clip_path(self.category, self.action, self.animation_id, self.variant_id, self.viewpoint_id)


@dataclass(frozen=True)
class RecordingPlan:
    categories: tuple[CategoryEntry, ...]
    digest: str

    @property
    def animations(self) -> dict[str, AnimationEntry]:
        return {a.animation_id: a for c in self.categories for act in c.actions for a in act.animations}

    def clips(self) -> list[PlannedClip]:
        out = []
        for c in self.categories:
            for act in c.actions:
                for a in act.animations:
                    for v in range(a.variants):
                        for k in range(a.viewpoints):
                            out.append(PlannedClip(c.name, act.name, a.animation_id, v, k, act.label_id))
        return out

    def __len__(self):
        return sum(a.variants * a.viewpoints for a in self.animations.values())


@dataclass(frozen=True)
class ClipRecord:
    category: str
    action: str
    animation_id: str
    variant_id: int
    viewpoint_id: int
    clip_path: str
    start_frame: int
    end_frame: int
    label_id: int

    def __post_init__(self):
        if not 0 <= self.start_frame <= self.end_frame:
            raise ValidationError(f"bad frame range for {self.clip_path}")

    @property
    def num_frames(self) -> int:
        return self.end_frame - self.start_frame + 1

    @property
    def key(self) -> tuple:
        return (self.category, self.action, self.animation_id, self.variant_id, self.viewpoint_id)


@dataclass(frozen=True)
class ClipManifest:
    records: tuple[ClipRecord, ...]
    plan_digest: str = ""

    def __post_init__(self):
        recs = tuple(sorted(self.records, key=lambda r: r.clip_path))
        keys = [r.key for r in recs]
        if len(set(keys)) != len(keys):
            raise ValidationError("manifest has duplicate clip identities")
        object.__setattr__(self, "records", recs)

    def __len__(self):
        return len(self.records)


def clip_path(category: str, action: str, animation_id: str, variant: int, viewpoint: int) -> str:
    return f"{category}/{action}/{animation_id}/v{variant:02d}/cam{viewpoint:02d}"


def _name(value, what: str) -> str:
    s = str(value)
    if not _SAFE_NAME.match(s):
        raise ValidationError(f"{what} {s!r} is not a safe path component")
    return s


def _count(value, what: str) -> int:
    if isinstance(value, bool) or int(value) != value or int(value) < 1:
        raise ValidationError(f"{what} must be a positive integer")
    return int(value)


def plan_digest(doc) -> str:
    return hashlib.sha256(json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()).hexdigest()


def build_plan(doc: Mapping) -> RecordingPlan:
    """Validate a plan document and expand it into a :class:`RecordingPlan`."""
    try:
        cats_doc = list(doc["categories"])
    except (KeyError, TypeError) as exc:
        raise ValidationError("plan document needs a 'categories' list") from exc
    if not cats_doc:
        raise ValidationError("plan has no categories")
    labels, anim_ids, cats = set(), set(), []
    try:
        for c in cats_doc:
            cname = _name(c["name"], "category")
            if not c.get("actions"):
                raise ValidationError(f"category {cname!r} has no actions")
            actions = []
            for a in c["actions"]:
                aname = _name(a["name"], "action")
                label = a["label_id"]
                if isinstance(label, bool) or int(label) != label:
                    raise ValidationError(f"label_id of {aname!r} must be an integer")
                if label in labels:
                    raise ValidationError(f"duplicate label_id {label}")
                labels.add(label)
                if not a.get("animations"):
                    raise ValidationError(f"action {aname!r} has no animations")
                anims = []
                for m in a["animations"]:
                    mid = _name(m["animation_id"], "animation_id")
                    if mid in anim_ids:
                        raise ValidationError(f"duplicate animation_id {mid!r}")
                    anim_ids.add(mid)
                    anims.append(
                        AnimationEntry(
                            mid,
                            _count(m["variants"], f"variants of {mid!r}"),
                            _count(m["viewpoints"], f"viewpoints of {mid!r}"),
                            m.get("source"),
                        )
                    )
                actions.append(ActionEntry(aname, int(label), tuple(anims)))
            cats.append(CategoryEntry(cname, tuple(actions)))
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed plan document: missing {exc}") from exc
    return RecordingPlan(tuple(cats), plan_digest(doc))


def load_plan(path) -> RecordingPlan:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ValidationError(f"plan file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"plan file does not parse: {exc}") from exc
    return build_plan(doc)


def execute_plan(
    plan: RecordingPlan,
    animations: Mapping,
    trajectories: Mapping[tuple[str, int], CameraTrajectory],
    topology,
    intrinsics: CameraIntrinsics,
    out_root,
    image_format: str = "ppm",
) -> ClipManifest:
    """Render every planned clip and annotate it over its full length.

    ``animations`` maps animation ids to :class:`~skelforge.dsi.AnimationSet`;
    ``trajectories`` maps ``(animation_id, viewpoint)`` to a camera path that
    all variants of that animation share.
    """
    root = Path(out_root)
    records = []
    for clip in plan.clips():
        ident = clip.clip_path
        anim = animations.get(clip.animation_id)
        if anim is None:
            raise ValidationError(f"{ident}: no animation {clip.animation_id!r}")
        if clip.variant_id >= anim.num_variants:
            raise ValidationError(f"{ident}: animation has only {anim.num_variants} variants")
        traj = trajectories.get((clip.animation_id, clip.viewpoint_id))
        if traj is None:
            raise ValidationError(f"{ident}: no camera trajectory for viewpoint {clip.viewpoint_id}")
        try:
            frames = render_clip(anim.variant(clip.variant_id), topology, traj, intrinsics)
            target = root / ident
            if target.exists():
                for old in target.glob("frame_*"):
                    old.unlink()
            write_clip(frames, target, image_format)
        except ValidationError as exc:
            raise ValidationError(f"{ident}: {exc}") from exc
        except Exception as exc:
            raise RuntimeError(f"rendering {ident} failed: {exc}") from exc
        records.append(
            ClipRecord(
                clip.category,
                clip.action,
                clip.animation_id,
                clip.variant_id,
                clip.viewpoint_id,
                ident,
                0,
                len(frames) - 1,
                clip.label_id,
            )
        )
    return ClipManifest(tuple(records), plan.digest)


def manifest_csv(manifest: ClipManifest) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(MANIFEST_HEADER)
    for r in manifest.records:
        w.writerow([getattr(r, name) for name in MANIFEST_HEADER])
    return buf.getvalue()


def write_manifest(manifest: ClipManifest, path) -> Path:
    """Write the CSV manifest and a ``.meta.json`` sidecar holding the plan digest."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(manifest_csv(manifest))
    meta = {"plan_digest": manifest.plan_digest, "clips": len(manifest)}
    with open(path.with_suffix(".meta.json"), "w", encoding="utf-8", newline="") as fh:
        fh.write(json.dumps(meta, indent=1, sort_keys=True) + "\n")
    return path


def read_manifest(path) -> ClipManifest:
    path = Path(path)
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != MANIFEST_HEADER:
        raise ValidationError(f"{path} does not start with the manifest header")
    types = {f.name: f.type for f in fields(ClipRecord)}
    records = []
    for row in rows[1:]:
        vals = dict(zip(MANIFEST_HEADER, row))
        for k, t in types.items():
            if t == "int":
                vals[k] = int(vals[k])
        records.append(ClipRecord(**vals))
    meta_path = path.with_suffix(".meta.json")
    digest = json.loads(meta_path.read_text(encoding="utf-8"))["plan_digest"] if meta_path.exists() else ""
    return ClipManifest(tuple(records), digest)


def audit_manifest(manifest: ClipManifest, root) -> list[str]:
    """Problems found comparing records with the clip directories on disk."""
    problems = []
    root = Path(root)
    for r in manifest.records:
        d = root / r.clip_path
        if len(Path(r.clip_path).parts) != HIERARCHY_DEPTH:
            problems.append(f"{r.clip_path}: hierarchy depth is not {HIERARCHY_DEPTH}")
        if not d.is_dir():
            problems.append(f"{r.clip_path}: missing directory")
            continue
        n = len(list(d.glob("frame_*")))
        if n != r.num_frames:
            problems.append(f"{r.clip_path}: {n} frames on disk, {r.num_frames} annotated")
    return problems

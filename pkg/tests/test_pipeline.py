from __future__ import annotations

import hashlib
import json

import pytest

import skelforge.dataset
from skelforge.dataset import audit_manifest, read_manifest
from skelforge.errors import StageError, ValidationError
from skelforge.io import read_json
from skelforge.pipeline import PipelineConfig, run_pipeline


def tree_digest(root):
    h = hashlib.sha256()
    for p in sorted(root.rglob("*")):
        if p.is_file() and p.name != "summary.json":
            h.update(str(p.relative_to(root)).encode())
            h.update(p.read_bytes())
    return h.hexdigest()


def test_toy_run(toy_dir):
    cfg = PipelineConfig.load(toy_dir / "toy_config.json")
    manifest, summary = run_pipeline(cfg)
    out = toy_dir / "out"
    assert len(manifest) == 4 == summary["clips"]
    info = summary["animations"]["walk_01"]
    assert (info["frames_in"], info["frames_out"]) == (20, 13)
    assert info["fps_out"] == pytest.approx(30 * 12 / 19)
    assert audit_manifest(read_manifest(out / "manifest.csv"), out / "clips") == []
    assert all(r.num_frames == 13 for r in manifest.records)
    assert not (out / ".staging").exists()
    assert read_json(out / "summary.json")["seed"] == 7
    assert set(summary["timing_s"]) == {"convert", "interpolate", "variants", "camera", "build"}


def test_rerun_is_identical(toy_dir):
    cfg = PipelineConfig.load(toy_dir / "toy_config.json")
    m1, _ = run_pipeline(cfg)
    first = tree_digest(toy_dir / "out")
    m2, _ = run_pipeline(cfg)
    assert m1 == m2
    assert tree_digest(toy_dir / "out") == first


def test_seed_changes_output(toy_dir):
    a = run_pipeline(PipelineConfig.load(toy_dir / "toy_config.json"))
    da = tree_digest(toy_dir / "out")
    run_pipeline(PipelineConfig.load(toy_dir / "toy_config.json", seed=8))
    assert tree_digest(toy_dir / "out") != da
    assert a[1]["seed"] == 7


def test_missing_topology_fails_before_work(toy_dir):
    doc = read_json(toy_dir / "toy_config.json")
    doc["topology"] = "nowhere.json"
    with pytest.raises(ValidationError, match="topology"):
        PipelineConfig.from_dict(doc, toy_dir)
    assert not (toy_dir / "out").exists()


@pytest.mark.parametrize(
    "patch, match",
    [
        ({"plan": "missing_plan.json"}, "plan"),
        ({"surprise": 1}, "unknown"),
        ({"dsi": {"delta": -1}}, "delta"),
        ({"image_format": "gif"}, "format"),
    ],
)
def test_config_validation(toy_dir, patch, match):
    doc = {**read_json(toy_dir / "toy_config.json"), **patch}
    with pytest.raises(ValidationError, match=match):
        PipelineConfig.from_dict(doc, toy_dir)


def test_failure_lands_in_quarantine(toy_dir, monkeypatch):
    def boom(*a, **k):
        raise OSError("disk on fire")

    monkeypatch.setattr(skelforge.dataset, "write_clip", boom)
    cfg = PipelineConfig.load(toy_dir / "toy_config.json")
    with pytest.raises(StageError) as info:
        run_pipeline(cfg)
    assert info.value.stage == "build"
    out = toy_dir / "out"
    assert (out / "quarantine" / "work" / "animations" / "walk_01" / "index.json").is_file()
    assert not (out / "manifest.csv").exists()
    assert not (out / "summary.json").exists()


def test_bad_input_names_stage(toy_dir):
    doc = read_json(toy_dir / "toy_walk.json")
    doc["frames"][3][2] = doc["frames"][3][1]  # collapse a bone
    (toy_dir / "toy_walk.json").write_text(json.dumps(doc))
    with pytest.raises(StageError) as info:
        run_pipeline(PipelineConfig.load(toy_dir / "toy_config.json"))
    assert info.value.stage == "convert"
    assert "frame 3" in str(info.value) and "l_leg" in str(info.value)
    assert isinstance(info.value.cause.cause, ValidationError)

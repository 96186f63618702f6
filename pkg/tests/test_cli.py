from __future__ import annotations

import filecmp
import json

import pytest

import skelforge.dataset
from skelforge.cli import main


def same_tree(a, b):
    cmp = filecmp.dircmp(a, b)
    stack = [cmp]
    while stack:
        c = stack.pop()
        if c.left_only or c.right_only or c.funny_files:
            return False
        _, mismatch, errors = filecmp.cmpfiles(c.left, c.right, c.common_files, shallow=False)
        if mismatch or errors:
            return False
        stack.extend(c.subdirs.values())
    return True


def test_run_command(toy_dir, capsys):
    assert main(["run", "--config", str(toy_dir / "toy_config.json")]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["clips"] == 4
    assert (toy_dir / "out" / "manifest.csv").is_file()


def test_stage_chain_matches_run(toy_dir):
    d = toy_dir
    w = d / "chain" / "work"
    topo = ["--topology", str(d / "toy_topology.json")]
    assert main(["run", "--config", str(d / "toy_config.json"), "--out", str(d / "ref")]) == 0
    rot = w / "rotations" / "walk_01.json"
    interp = w / "interpolated" / "walk_01.json"
    assert main(["convert", *topo, "--in", str(d / "toy_walk.json"), "--out", str(rot)]) == 0
    assert main(["interpolate", *topo, "--in", str(rot), "--out", str(interp)]) == 0
    assert main(["--seed", "7", "variants", *topo, "--count", "2", "--animation-id", "walk_01",
                 "--in", str(interp), "--out", str(w / "animations" / "walk_01")]) == 0
    for k in range(2):
        assert main(["camera", "--seed", "7", "--from", str(rot), "--moves", "3", "--hold", "4",
                     "--animation-id", "walk_01", "--viewpoint", str(k),
                     "--out", str(w / "cameras" / f"walk_01_cam{k:02d}.json")]) == 0
    assert main(["build", *topo, "--plan", str(d / "toy_plan.json"), "--animations", str(w / "animations"),
                 "--cameras", str(w / "cameras"), "--width", "160", "--height", "120", "--focal-px", "120",
                 "--out", str(d / "chain")]) == 0
    for sub in ("work/rotations", "work/interpolated", "work/animations", "work/cameras", "clips"):
        assert same_tree(d / "ref" / sub, d / "chain" / sub)
    assert (d / "ref" / "manifest.csv").read_bytes() == (d / "chain" / "manifest.csv").read_bytes()


def test_render_command(toy_dir):
    rot = toy_dir / "r.json"
    traj = toy_dir / "t.json"
    topo = ["--topology", str(toy_dir / "toy_topology.json")]
    assert main(["convert", *topo, "--in", str(toy_dir / "toy_walk.json"), "--out", str(rot)]) == 0
    assert main(["camera", "--origin", "0,0,1", "--moves", "1", "--hold", "10", "--out", str(traj)]) == 0
    assert main(["render", *topo, "--width", "64", "--height", "48", "--focal-px", "50", "--format", "png",
                 "--in", str(rot), "--traj", str(traj), "--out", str(toy_dir / "frames")]) == 0
    assert len(list((toy_dir / "frames").glob("frame_*.png"))) == 20


def test_validation_exit_code(toy_dir, capsys):
    doc = json.loads((toy_dir / "toy_config.json").read_text())
    doc["topology"] = "missing.json"
    (toy_dir / "bad.json").write_text(json.dumps(doc))
    assert main(["run", "--config", str(toy_dir / "bad.json")]) == 1
    assert "topology" in capsys.readouterr().err
    assert main(["camera", "--out", str(toy_dir / "t.json")]) == 1


def test_validation_inside_stage_exit_code(toy_dir):
    doc = json.loads((toy_dir / "toy_walk.json").read_text())
    doc["frames"][0][4] = doc["frames"][0][3]
    (toy_dir / "toy_walk.json").write_text(json.dumps(doc))
    assert main(["run", "--config", str(toy_dir / "toy_config.json")]) == 1


def test_runtime_exit_code(toy_dir, monkeypatch, capsys):
    def boom(*a, **k):
        raise OSError("no space left")

    monkeypatch.setattr(skelforge.dataset, "write_clip", boom)
    assert main(["run", "--config", str(toy_dir / "toy_config.json")]) == 2
    assert "[build]" in capsys.readouterr().err
    assert (toy_dir / "out" / "quarantine").is_dir()


def test_bad_arguments_exit_via_argparse():
    with pytest.raises(SystemExit) as info:
        main(["camera", "--origin", "1,2", "--out", "x"])
    assert info.value.code == 2
    with pytest.raises(SystemExit):
        main(["--seed", "-1", "run", "--config", "x"])


def test_report_command(toy_dir, capsys):
    assert main(["run", "--config", str(toy_dir / "toy_config.json")]) == 0
    capsys.readouterr()
    assert main(["report", "--run", str(toy_dir / "out"), "--out", str(toy_dir / "rep")]) == 0
    printed = capsys.readouterr().out.split()
    assert len(printed) == 4
    assert main(["report", "--run", str(toy_dir), "--out", str(toy_dir / "rep2")]) == 1

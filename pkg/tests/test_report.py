from __future__ import annotations

import csv

from skelforge.pipeline import PipelineConfig, run_pipeline
from skelforge.report import make_report


def test_report_files(toy_dir):
    run_pipeline(PipelineConfig.load(toy_dir / "toy_config.json"))
    paths = make_report(toy_dir / "out", toy_dir / "report")
    assert sorted(p.name for p in paths) == [
        "angular_distance.png", "animations.csv", "camera_paths.png", "motion.csv"
    ]
    for p in paths:
        assert p.stat().st_size > 0
    assert (toy_dir / "report" / "angular_distance.png").read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
    # the run keeps its own topology copy, so the report works from any cwd
    assert (toy_dir / "out" / "work" / "topology.json").is_file()
    rows = list(csv.DictReader(open(toy_dir / "report" / "animations.csv")))
    assert rows == [
        {"animation_id": "walk_01", "frames_in": "20", "frames_out": "13", "fps_in": "30",
         "fps_out": "18.9474", "edge_intervals": rows[0]["edge_intervals"], "clips": "4"}
    ]
    motion = list(csv.DictReader(open(toy_dir / "report" / "motion.csv")))
    assert sum(r["series"] == "input" for r in motion) == 20
    assert sum(r["series"] == "variant0" for r in motion) == 13

from __future__ import annotations

import shutil
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

from skelforge.skeleton import default_topology, load_topology

DATA = Path(__file__).parent / "data"

# fixed example generation keeps every run of the suite identical
settings.register_profile("repro", derandomize=True, deadline=None)
settings.load_profile("repro")


@pytest.fixture(scope="session")
def body():
    return default_topology()


@pytest.fixture(scope="session")
def toy():
    return load_topology(DATA / "toy_topology.json")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def toy_dir(tmp_path):
    """Copy of the toy config, plan, topology and walk in a scratch dir."""
    for f in DATA.glob("toy_*"):
        shutil.copy(f, tmp_path / f.name)
    return tmp_path


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])

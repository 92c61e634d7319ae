import math

import numpy as np
import pytest

from kneepkm import Pose, Unreachable, ik, reference_geometry

SAMPLE_LO = np.array([-0.25, 0.7, -math.radians(20), -math.radians(20)])
SAMPLE_HI = np.array([0.25, 1.15, math.radians(20), math.radians(20)])

_ACCEPTANCE_LINES = []


def record_acceptance(line: str) -> None:
    _ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def g0():
    return reference_geometry("G0")


@pytest.fixture(scope="session")
def g1():
    return reference_geometry("G1")


def feasible_poses(geom, n, seed=0):
    """Uniform poses from the sampling box that solve IK without violations."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        v = rng.uniform(SAMPLE_LO, SAMPLE_HI)
        pose = Pose(*v)
        try:
            sol = ik(geom, pose)
        except Unreachable:
            continue
        if not sol.violations:
            out.append(pose)
    return out

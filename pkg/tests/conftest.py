import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

from pitchfork import build_mesh, canonical_family, rotation_3d, side_reversing_wrap

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "scripts"))

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")

ROTATION_3D = rotation_3d([1.0, 2.0, 3.0], 0.7)


@pytest.fixture(scope="session")
def F2():
    return canonical_family(2)


@pytest.fixture(scope="session")
def F3():
    return canonical_family(3, ROTATION_3D)


@pytest.fixture(scope="session")
def G2():
    return side_reversing_wrap(canonical_family(2))


@pytest.fixture(scope="session")
def mesh64(F2):
    return build_mesh(F2.manifold, 64)


@pytest.fixture(scope="session")
def mesh256(F2):
    return build_mesh(F2.manifold, 256)


@pytest.fixture(scope="session")
def ico162(F3):
    return build_mesh(F3.manifold, 162)


@pytest.fixture(scope="session")
def ellipse():
    import ellipse_plugin

    return ellipse_plugin


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    RESULTS = getattr(mod, "RESULTS", None)
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(RESULTS):
            ok, detail = RESULTS[k]
            terminalreporter.write_line(f"criterion {k:>2}: {'PASS' if ok else 'FAIL'}  {detail}")


def branch_oracle(mu):
    return np.sqrt(mu)

import sys
from pathlib import Path

try:
    import hyperflow  # noqa: F401
except ImportError:  # run from a source checkout without installing
    sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

import pytest

from hyperflow import shapes


@pytest.fixture(scope="session")
def unit_circle_256():
    return shapes.circle_polygon(1.0, 256)


@pytest.fixture(scope="session")
def ellipse_2_1():
    return shapes.ellipse_polygon(2.0, 1.0, 256)


@pytest.fixture(scope="session")
def icosphere_sub3():
    return shapes.icosphere(1.0, 3)

import numpy as np
import pytest

from sfdbp.cost import build_label_set
from sfdbp.defocus import CameraConfig

# Implementer-chosen optics: 35 mm lens, 1 mm aperture radius, ~16.7 um pixels,
# the two captures focused in front of and behind a 0.30-0.40 m working range.
FOCAL = 0.035
APERTURE = 0.001
PIXEL_SCALE = 6e4


@pytest.fixture(scope="session")
def cams():
    return [
        CameraConfig.focused_at(0.28, FOCAL, APERTURE, PIXEL_SCALE),
        CameraConfig.focused_at(0.45, FOCAL, APERTURE, PIXEL_SCALE),
    ]


@pytest.fixture(scope="session")
def labels(cams):
    return build_label_set(0.30, 0.40, 16, cams)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

import sys

import numpy as np
import pytest

from slowdiffeo.diffeo import MapConfig
from slowdiffeo.numeric import BumpProfile, FourierSeries
from slowdiffeo.rotation import alpha_make


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def golden_sin():
    return MapConfig(FourierSeries.sine(), alpha_make("golden"))


@pytest.fixture
def mixed_cfg():
    # several harmonics with both cosine and sine parts
    F = FourierSeries(((1, 0.3, 0.5), (3, -0.2, 0.1), (7, 0.05, -0.04)))
    return MapConfig(F, alpha_make("silver"), BumpProfile(1, 0.25, 0.7))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)

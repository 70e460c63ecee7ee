import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from simcca.data import PairedWindow  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def make_window(seed, n=51, p=3, signal=0.8):
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n, 1))
    x = signal * z @ rng.standard_normal((1, p)) + rng.standard_normal((n, p))
    y = signal * z @ rng.standard_normal((1, p)) + rng.standard_normal((n, p))
    return PairedWindow.from_arrays(x - x.mean(0), y - y.mean(0))


# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")

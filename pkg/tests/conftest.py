import sys

import numpy as np
import pytest

EXAMPLE1 = [[0.017, 0.285], [0.424, 0.274]]
EXAMPLE2 = [
    [0.090, 0.098, 0.207, 0.064, 0.026],
    [0.239, 0.030, 0.104, 0.107, 0.035],
]
# printed entries sum to 0.937
EXAMPLE3 = [
    [0.101, 0.062, 0.025, 0.088, 0.005, 0.007, 0.069, 0.059, 0.080, 0.074],
    [0.103, 0.006, 0.038, 0.002, 0.018, 0.079, 0.049, 0.032, 0.020, 0.020],
]
# same table with entry (1, 6) read as 0.070; sums to 1
EXAMPLE3_FIXED = [row[:] for row in EXAMPLE3]
EXAMPLE3_FIXED[0][5] = 0.070


def random_joint(rng, my, alpha=1.0, floor=0.0):
    v = rng.dirichlet(np.full(2 * my, alpha)).reshape(2, my)
    if floor:
        v = v + floor
        v /= v.sum()
    return v


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for key, (ok, detail) in results.items():
        terminalreporter.write_line(f"criterion {key:>3}: {'PASS' if ok else 'FAIL'}  {detail}")

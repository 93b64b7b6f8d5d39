import numpy as np
import pytest

from mimkit.core import Dataset

ACCEPTANCE_LINES: list[str] = []


def random_dataset(rng, n=None, m=None, low=-10.0, high=10.0, mode="binary"):
    n = int(rng.integers(1, 9)) if n is None else n
    m = int(rng.integers(2, 13)) if m is None else m
    X = rng.uniform(low, high, size=(m, n))
    if mode == "binary":
        y = rng.choice([-1.0, 1.0], size=m)
    else:
        y = rng.uniform(0, 500, size=m)
    return Dataset(X, y, mode=mode)


@pytest.fixture
def rng():
    return np.random.default_rng(20181)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

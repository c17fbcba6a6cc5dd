from __future__ import annotations

import numpy as np
import pytest

from volterra_series import LinearKernelExpansion

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


def random_linear_kernel(rng, dim, degree, density=0.5, boost_k00=False):
    """Sparse kernel with uniform(-1, 1) matrices up to total degree ``degree``."""
    entries = {}
    for i in range(degree + 1):
        for j in range(degree + 1 - i):
            if rng.random() < density:
                entries[(i, j)] = rng.uniform(-1, 1, (dim, dim))
    if boost_k00 or not entries:
        entries[(0, 0)] = rng.uniform(-1, 1, (dim, dim)) + (2 * np.eye(dim) if boost_k00 else 0)
    return LinearKernelExpansion(dim, entries)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

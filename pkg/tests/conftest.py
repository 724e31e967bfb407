import logging
import math

import numpy as np
import pytest

from logns.domain import GridSpec
from logns.gradflow import FlowConfig, minimize

# waveguide mass whose reduced Gausson has lambda = 2 (d = 1, n = 1)
THETA_SQ = 2.0 * math.pi * math.sqrt(math.pi) * math.e**3
THETA = math.sqrt(THETA_SQ)
# 2 pi * (-sqrt(pi) e^3 / 2), frozen from the closed form
REFERENCE = -111.8428575807828

logging.getLogger("logns.evolve").setLevel(logging.ERROR)


@pytest.fixture(scope="session")
def grid11():
    return GridSpec(d=1, n=1)


@pytest.fixture(scope="session")
def grid10():
    return GridSpec(d=1, n=0)


@pytest.fixture(scope="session")
def ground_state(grid11):
    """Converged mu = 1 minimizer from random starts (shared, expensive)."""
    return minimize(FlowConfig(theta=THETA, mu=1.0, init="random"), grid11)


@pytest.fixture(scope="session")
def mu_scan(grid11):
    """The 13-point mu-scan at the reference mass (shared)."""
    from logns.depscan import MuScanConfig, scan

    return scan(MuScanConfig(theta=THETA, grid=grid11))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def _lines(config):
    if not hasattr(config, "_acceptance_lines"):
        config._acceptance_lines = []
    return config._acceptance_lines


@pytest.fixture
def acceptance_report(request):
    def report(number, ok, detail):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(line)
        _lines(request.config).append(line)
        return ok

    return report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = _lines(config)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split(":")[0].split()[1])):
            terminalreporter.write_line(line)

from __future__ import annotations

import numpy as np
import pytest

from mmqubit.netlist import difluxmon
from mmqubit.quantize import REFERENCE_CUTOFFS
from mmqubit.spectrum import diagonalize


@pytest.fixture(scope="session")
def device():
    return difluxmon()


@pytest.fixture(scope="session")
def reference(device):
    """(system, solution, spectrum) of the reference device at pi, 6 states."""
    return diagonalize(device, 6, REFERENCE_CUTOFFS)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(1234)


def pytest_configure(config):
    config.acceptance_lines = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)

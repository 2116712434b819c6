import numpy as np
import pytest

from ftlab.builders import build_encoded_gate


@pytest.fixture(scope="session")
def cnot_gate():
    """Recoveries of both blocks, transversal CNOT, and the next gate's first attempt."""
    return build_encoded_gate()


@pytest.fixture(scope="session")
def cnot_gate_alone():
    return build_encoded_gate(following=False)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)

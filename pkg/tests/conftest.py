import math

import numpy as np
import pytest
from hypothesis import strategies as st

from wfsim.statevector import StateVector


def multinomial_within(counts, probs, n, k=5.0):
    """True when every bin lies within k binomial sigmas of n*p (zero-probability bins must be empty)."""
    for c, p in zip(counts, probs):
        if p < 1e-15:
            if c != 0:
                return False
            continue
        if abs(c - n * p) > k * math.sqrt(n * p * (1 - p)):
            return False
    return True


@st.composite
def random_states(draw, n_qubits=st.integers(1, 6)):
    n = draw(n_qubits)
    parts = draw(st.lists(st.floats(-1, 1, allow_nan=False), min_size=2 << n, max_size=2 << n))
    v = np.array(parts[: 1 << n]) + 1j * np.array(parts[1 << n:])
    norm = np.linalg.norm(v)
    if norm < 1e-3:
        v = np.zeros(1 << n, dtype=complex)
        v[0] = 1
    else:
        v = v / norm
    return StateVector(n, v)


@st.composite
def random_unitaries(draw):
    a, b, c, d = (draw(st.floats(-math.pi, math.pi)) for _ in range(4))
    # U = e^{ia} Rz(b) Ry(c) Rz(d)
    rz = lambda t: np.diag([np.exp(-0.5j * t), np.exp(0.5j * t)])
    ry = np.array([[math.cos(c / 2), -math.sin(c / 2)], [math.sin(c / 2), math.cos(c / 2)]])
    return np.exp(1j * a) * rz(b) @ ry @ rz(d)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# acceptance criteria append "PASS/FAIL ..." lines here; printed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda l: int(l.split("#")[1].split()[0])):
            terminalreporter.write_line(line)

import numpy as np
import pytest
from hypothesis import strategies as st

from phaseless.hermite_bargmann import HermiteSignal

ACCEPTANCE_LINES: list[str] = []

finite = st.floats(min_value=-3, max_value=3, allow_nan=False, allow_infinity=False)
complex_scalar = st.builds(complex, finite, finite)
seeds = st.integers(min_value=0, max_value=2**32 - 1)


def random_signal(seed: int, degree: int = 6, real: bool = False) -> HermiteSignal:
    return HermiteSignal.random(degree, np.random.default_rng(seed), real=real)


@st.composite
def signals(draw, max_degree: int = 6, real: bool = False):
    degree = draw(st.integers(min_value=0, max_value=max_degree))
    return random_signal(draw(seeds), degree, real)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

import math

import numpy as np
import pytest
from hypothesis import strategies as st

from ncmax.rearrange import SpectralProfile, profile

ACCEPTANCE_LINES: list[str] = []


def record(criterion: str, ok: bool, detail: str = "") -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] {criterion}" + (f" :: {detail}" if detail else "")
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def two_atoms() -> SpectralProfile:
    return profile([(3, 1), (1, 1)])


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


values = st.floats(min_value=1e-3, max_value=1e3, allow_nan=False, allow_infinity=False)
weights = st.floats(min_value=1e-2, max_value=1e2, allow_nan=False, allow_infinity=False)
atoms = st.lists(st.tuples(values, weights), min_size=1, max_size=24)
profiles = atoms.map(profile)


def close(a, b, rtol=1e-9, atol=0.0) -> bool:
    return math.isclose(a, b, rel_tol=rtol, abs_tol=atol)

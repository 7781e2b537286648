import itertools

import numpy as np
import pytest
from hypothesis import strategies as st

from minionlab.boolfn import BoolFn, all_monotone, random_monotone

# lines recorded by test_acceptance, echoed at the end of the run
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])


@pytest.fixture(scope="session")
def monotone4():
    return all_monotone(4)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def brute_monotone(f: BoolFn) -> bool:
    """Compare every comparable pair of points."""
    n = f.arity
    for x, y in itertools.product(range(1 << n), repeat=2):
        if x & ~y == 0 and f.table[x] > f.table[y]:
            return False
    return True


@st.composite
def monotone_fns(draw, min_arity=1, max_arity=7):
    n = draw(st.integers(min_arity, max_arity))
    seed = draw(st.integers(0, 2**32 - 1))
    return random_monotone(n, np.random.default_rng(seed))


@st.composite
def any_fns(draw, min_arity=1, max_arity=5):
    n = draw(st.integers(min_arity, max_arity))
    bits = draw(st.lists(st.booleans(), min_size=1 << n, max_size=1 << n))
    return BoolFn(n, np.array(bits, dtype=bool))

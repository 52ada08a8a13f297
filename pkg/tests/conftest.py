import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from jsrlab.dist import MatrixDistribution

settings.register_profile(
    "default",
    deadline=None,
    max_examples=40,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.register_profile("explore", parent=settings.get_profile("default"), derandomize=False,
                          max_examples=200)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

entries = st.floats(-2.0, 2.0, allow_nan=False, allow_infinity=False, allow_subnormal=False)
nonneg_entries = st.floats(0.0, 2.0, allow_nan=False, allow_infinity=False, allow_subnormal=False)


def square(n, elements=entries):
    return arrays(np.float64, (n, n), elements=elements)


@st.composite
def finite_dists(draw, n=None, nonneg=False, max_atoms=3):
    n = draw(st.integers(1, 3)) if n is None else n
    k = draw(st.integers(1, max_atoms))
    elems = nonneg_entries if nonneg else entries
    atoms = [draw(square(n, elems)) for _ in range(k)]
    w = np.array(draw(st.lists(st.floats(0.1, 1.0), min_size=k, max_size=k)))
    return MatrixDistribution.finite(atoms, w / w.sum())


def random_nonneg_finite(rng, n, n_atoms=None):
    n_atoms = n_atoms or int(rng.integers(1, 4))
    atoms = [rng.random((n, n)) for _ in range(n_atoms)]
    w = rng.random(n_atoms) + 0.1
    return MatrixDistribution.finite(atoms, w / w.sum())


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)

import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from matineq import generators as gen

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("thorough", max_examples=500, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

fields = st.sampled_from(gen.FIELDS)
seeds = st.integers(0, 2**32 - 1)
conds = st.sampled_from([1.0, 10.0, 1e3, 1e4])


@st.composite
def pd_matrices(draw, max_n=6, n=None):
    n = draw(st.integers(1, max_n)) if n is None else n
    return gen.random_pd(gen.GenSpec(n, cond=draw(conds), field=draw(fields), seed=draw(seeds)))


@st.composite
def pd_pairs(draw, max_n=6):
    n = draw(st.integers(1, max_n))
    return draw(pd_matrices(n=n)), draw(pd_matrices(n=n))


@st.composite
def psd_pairs(draw, max_n=6):
    """PSD pairs where either side may be rank deficient."""
    n = draw(st.integers(1, max_n))
    field = draw(fields)
    out = []
    for _ in range(2):
        rank = draw(st.integers(0, n))
        out.append(gen.random_psd_rank(gen.GenSpec(n, rank=rank, cond=draw(conds), field=field,
                                                   seed=draw(seeds))))
    return tuple(out)


def fro(M):
    return float(np.linalg.norm(M))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda l: int(l.split()[1])):
            terminalreporter.write_line(line)

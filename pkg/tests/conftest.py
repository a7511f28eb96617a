import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from vmcascade.prob import JointDistribution

settings.register_profile("repo", derandomize=True, deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")

NAMES = ("A", "B", "C", "D")


@st.composite
def joints(draw, max_vars=4, max_size=4, min_vars=2):
    """Random JointDistribution with named variables A, B, C, ..."""
    n = draw(st.integers(min_vars, max_vars))
    sizes = tuple(draw(st.integers(1, max_size)) for _ in range(n))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    p = rng.dirichlet(np.ones(int(np.prod(sizes))))
    if draw(st.booleans()):
        p[rng.random(p.size) < 0.3] = 0.0
        if p.sum() == 0:
            p[0] = 1.0
        p /= p.sum()
    return JointDistribution.from_array(NAMES[:n], p.reshape(sizes))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

import numpy as np
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from discreg.mdp import Mdp

settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@st.composite
def mdps(draw, max_states=6, max_actions=3, min_gamma=0.5, max_gamma=0.95):
    """Small random MDPs built from a drawn seed (keeps shrinking cheap)."""
    n = draw(st.integers(1, max_states))
    a = draw(st.integers(1, max_actions))
    seed = draw(st.integers(0, 2**32 - 1))
    gamma = draw(st.floats(min_gamma, max_gamma))
    rng = np.random.default_rng(seed)
    t = rng.dirichlet(np.full(n, 0.5), size=(n, a))
    r = rng.uniform(-1, 1, size=(n, a))
    return Mdp(r, t, gamma)


@st.composite
def count_tensors(draw, max_states=6, max_actions=3, max_count=30, allow_empty=True):
    n = draw(st.integers(1, max_states))
    a = draw(st.integers(1, max_actions))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    c = rng.integers(0, max_count + 1, size=(n, a, n))
    if not allow_empty:
        c[..., 0] += (c.sum(axis=2) == 0)
    return c


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])

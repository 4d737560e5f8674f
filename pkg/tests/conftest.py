import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from vbvarsel.model import DataMatrix, Hyperparameters, init_state, standardize

settings.register_profile(
    "default",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
    max_examples=60,
)
settings.load_profile("default")


def small_problem(seed=0, n=10, j=4, k=2, c=None, **hyper):
    """Random standardized data and a state after one symmetry-breaking M-step."""
    from vbvarsel.engine import update_component_params, update_mixture_weights

    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, j))
    x[: n // 2, : max(1, j // 2)] += 2.0
    data = standardize(DataMatrix(x))
    h = Hyperparameters(k_max=k, **hyper)
    st = init_state(data, h, seed)
    if c is not None:
        st = st.replace(c=np.broadcast_to(np.asarray(c, dtype=float), (j,)).copy())
    st = update_mixture_weights(st, h.alpha0, 1.0)
    st = update_component_params(st, data.values, h.beta0, h.a0, 1.0)
    return data, h, st


def state_as_lists(st):
    return {
        "r": st.r.tolist(),
        "c": st.c.tolist(),
        "alpha": st.alpha.tolist(),
        "beta": st.beta.tolist(),
        "m": st.m.tolist(),
        "a": st.a.tolist(),
        "b": st.b.tolist(),
        "mu0": st.null.mu0.tolist(),
        "tau0": st.null.tau0.tolist(),
        "m0": st.m0.tolist(),
        "b0": st.b0.tolist(),
    }


def hyper_as_dict(h):
    return {"alpha0": h.alpha0, "beta0": h.beta0, "a0": h.a0, "d0": h.d0}


@pytest.fixture
def problem():
    return small_problem()


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def h2(p):
    """Binary entropy in bits."""
    p = np.asarray(p, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = -p * np.log2(p) - (1 - p) * np.log2(1 - p)
    return np.where((p <= 0) | (p >= 1), 0.0, out)


def bsc_capacity(eps):
    return float(1 - h2(eps))


def z_capacity(eps0):
    return float(np.log2(1 + (1 - eps0) * eps0 ** (eps0 / (1 - eps0))))


def bsc_capacity_energy(eps, B):
    """Closed form with Hamming energy: E[b(Y)] = P(Y=1)."""
    if B <= 0.5:
        return bsc_capacity(eps)
    return float(h2(B) - h2(eps))


def random_dmc_rows(rng, n, m):
    return rng.dirichlet(np.ones(m), size=n)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE = {}


@pytest.fixture
def criterion(request):
    """Record a numbered acceptance criterion's outcome and runtime for the summary."""
    import time

    state = {}

    def start(number, title):
        state.update(number=number, title=title, t0=time.perf_counter())

    yield start
    if state:
        rep = getattr(request.node, "rep_call", None)
        ok = rep is not None and rep.passed
        ACCEPTANCE[state["number"]] = (state["title"], ok, time.perf_counter() - state["t0"])


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        title, ok, secs = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {title}  ({secs:.1f} s)")

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from isodrast import HamiltonianFn, LoopEmbedding, Weighting

settings.register_profile(
    "isodrast",
    max_examples=25,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("isodrast")

N = 128


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def circle():
    return LoopEmbedding.circle(N)


@pytest.fixture
def uniform():
    return Weighting.uniform(N)


@pytest.fixture
def Xq(circle):
    return HamiltonianFn.from_expr("q").vector_field(circle.samples)


@pytest.fixture
def Xp(circle):
    return HamiltonianFn.from_expr("p").vector_field(circle.samples)


def pytest_terminal_summary(terminalreporter):
    """One PASS/FAIL line per acceptance criterion that ran."""
    module = __import__("sys").modules.get("test_acceptance") or __import__("sys").modules.get("tests.test_acceptance")
    results = getattr(module, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for k in sorted(results):
            terminalreporter.write_line(results[k])

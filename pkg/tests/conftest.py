import re

import numpy as np
import pytest

from barysub.hyperbolic import Hyperbolic
from barysub.manifold import Euclidean
from barysub.sphere import Sphere

MANIFOLDS = {
    "sphere2": Sphere(2),
    "sphere5": Sphere(5),
    "hyperbolic2": Hyperbolic(2),
    "hyperbolic4": Hyperbolic(4),
    "euclidean3": Euclidean(3),
}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=sorted(MANIFOLDS))
def manifold(request):
    return MANIFOLDS[request.param]


@pytest.fixture(params=["sphere2", "sphere5", "hyperbolic2", "hyperbolic4"])
def curved(request):
    return MANIFOLDS[request.param]


def random_tangent_in_ball(M, x, rng, max_norm):
    """Tangent vector at ``x`` with uniformly drawn norm below ``max_norm``."""
    v = M.random_tangent(x, rng)
    return v / M.norm(x, v) * rng.uniform(0, max_norm)


# -- acceptance report ---------------------------------------------------------

_acceptance = {}


def pytest_runtest_logreport(report):
    m = re.search(r"test_ac(\d+)_", report.nodeid)
    if not m or "test_acceptance" not in report.nodeid:
        return
    n = int(m.group(1))
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        prev = _acceptance.get(n, "PASS")
        _acceptance[n] = "PASS" if report.outcome == "passed" and prev == "PASS" else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_acceptance):
        terminalreporter.write_line(f"AC{n} {_acceptance[n]}")

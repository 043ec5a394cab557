import os
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from xychain import ed
from xychain.model import ModelParams, majorana_covariance

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def ed_cache():
    """Dense ground states shared across tests, keyed by (N, gamma, lambda)."""
    store = {}

    def get(N, gamma, lam):
        key = (N, gamma, lam)
        if key not in store:
            store[key] = ed.solve(ModelParams(N, gamma, lam))
        return store[key]

    return get


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def covariance(N, gamma, lam):
    return majorana_covariance(ModelParams(N, gamma, lam))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    REPORT = getattr(mod, "REPORT", None)
    if REPORT:
        terminalreporter.section("acceptance criteria")
        for line in REPORT:
            terminalreporter.write_line(line)

"""Shared fixtures and the acceptance-criterion report.

Tests marked ``@pytest.mark.criterion("name")`` are collected into a pass/fail list
printed at the end of the run, one line per criterion.
"""
from __future__ import annotations

import warnings

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from laguerre_owwe.experiments import Setup1D
from laguerre_owwe.solver2d import StabilityWarning

settings.register_profile(
    "default",
    deadline=None,
    max_examples=50,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

_CRITERIA: dict[str, list[str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion checked by this test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _CRITERIA.setdefault(marker.args[0], []).append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcomes in _CRITERIA.items():
        status = "PASS" if all(o == "passed" for o in outcomes) else "FAIL"
        terminalreporter.write_line(f"{status}  {name}  ({len(outcomes)} check(s))")


@pytest.fixture(autouse=True)
def _quiet_ratio_warnings():
    # threshold tests deliberately run outside the recommended step ratios
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", StabilityWarning)
        yield


@pytest.fixture(scope="session")
def setup1d() -> Setup1D:
    return Setup1D()


@pytest.fixture(scope="session")
def boundary1d(setup1d):
    return setup1d.boundary()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

import os
import sys

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

from solitary.chabauty import SubgroupHandle, SubgroupUniverse  # noqa: E402
from solitary.cosets import low_index  # noqa: E402
from solitary.words import parse_presentation  # noqa: E402

settings.register_profile(
    "repro",
    derandomize=True,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "repro"))


@pytest.fixture(scope="session")
def Z():
    return parse_presentation("<a|>")


@pytest.fixture(scope="session")
def F2():
    return parse_presentation("<a,b|>")


@pytest.fixture(scope="session")
def S3():
    return parse_presentation("<a,b| a^2, b^2, (a*b)^3>")


@pytest.fixture(scope="session")
def BS12():
    return parse_presentation("<s,t| t^-1 s t = s^2>")


_cache: dict = {}


def f2_low_index_8():
    if "f2_8" not in _cache:
        _cache["f2_8"] = low_index(parse_presentation("<a,b|>"), 8)
    return _cache["f2_8"]


def f2_universe_8():
    if "u8" not in _cache:
        _cache["u8"] = SubgroupUniverse(SubgroupHandle.finite_index(t) for t in f2_low_index_8())
    return _cache["u8"]


# one line per acceptance criterion, shown in the terminal summary
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])

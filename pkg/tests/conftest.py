import os
import sys

import pytest
from hypothesis import HealthCheck, settings

from adapted_star.connection import ConnectionSpec
from adapted_star.fedosov import build_state
from adapted_star.parse import parse_expression
from adapted_star.weyl import ChartContext

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", deadline=None, max_examples=400, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def nonflat_spec_n1() -> ConnectionSpec:
    P = lambda s: parse_expression(s, 1)
    return ConnectionSpec.symmetric(1, {(1, 1, 1): P("p1"), (1, 1, 2): P("x1 + 1/2"), (1, 2, 2): P("1")})


def nonflat_spec_n2() -> ConnectionSpec:
    P = lambda s: parse_expression(s, 2)
    return ConnectionSpec.symmetric(
        2, {(1, 1, 1): P("x1*p2 + 1"), (1, 2, 3): P("p1"), (1, 3, 4): P("x2"), (2, 2, 4): P("p1*p2")}
    )


@pytest.fixture(scope="session")
def ctx1():
    return ChartContext(1)


@pytest.fixture(scope="session")
def ctx2():
    return ChartContext(2)


@pytest.fixture(scope="session")
def spec1():
    return nonflat_spec_n1()


@pytest.fixture(scope="session")
def spec2():
    return nonflat_spec_n2()


@pytest.fixture(scope="session")
def flat1(ctx1):
    return build_state(ctx1, ConnectionSpec.flat(1), [2], 6)


@pytest.fixture(scope="session")
def curved1(ctx1, spec1):
    return build_state(ctx1, spec1, ["-1/3"], 5)


@pytest.fixture(scope="session")
def flat2(ctx2):
    return build_state(ctx2, ConnectionSpec.flat(2), [2, "1/2"], 4)


@pytest.fixture(scope="session")
def curved2(ctx2, spec2):
    return build_state(ctx2, spec2, [1, 2], 4)


ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, title = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {title}")

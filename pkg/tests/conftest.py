import numpy as np
import pytest

from dsrothe.problems import abs_friction_scalar, build_rod_problem, smooth_linear_base, zero_problem


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def rod():
    return build_rod_problem()


@pytest.fixture(scope="session")
def scalar_abs():
    return abs_friction_scalar()


@pytest.fixture(scope="session")
def smooth_base():
    return smooth_linear_base()


@pytest.fixture(scope="session")
def zero():
    return zero_problem(2)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(RESULTS):
        ok, detail = RESULTS[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")

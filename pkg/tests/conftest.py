import numpy as np
import pytest

from windpitch import design, plant


@pytest.fixture(scope="session")
def fitted():
    return design.fitted_params(plant.TurbineParams(), design.OperatingPoint())


@pytest.fixture(scope="session")
def op():
    return design.OperatingPoint()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])

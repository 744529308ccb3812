import math

import pytest

from cavity_delay.params import SystemParams, make_system_params

_REPORT = []


def pytest_terminal_summary(terminalreporter):
    if _REPORT:
        terminalreporter.section("acceptance criteria")
        for line in _REPORT:
            terminalreporter.write_line(line)


@pytest.fixture
def report():
    def _report(name, ok, detail):
        line = f"{name}: {'PASS' if ok else 'FAIL'}  {detail}"
        _REPORT.append(line)
        print(line)
        assert ok, line
    return _report


@pytest.fixture
def device():
    """Reference device with the coupling read as rad/s."""
    return make_system_params(7.5e9, 6.3e6, 6.0e5, 250.0, 1e6, lambda_angular=True)


@pytest.fixture
def bistable():
    # kappa = 1 and alpha * omega_n = 2 lam^2 / omega_n = 1
    return SystemParams(omega_c=10.0, omega_n=2.0, kappa=1.0, lam=1.0, gamma_n=0.1)


@pytest.fixture
def scaled():
    return SystemParams(omega_c=50.0, omega_n=1.0, kappa=0.1, lam=0.01, gamma_n=0.02)


TWO_PI = 2 * math.pi

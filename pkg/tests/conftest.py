import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def moment_cov_se(a, b):
    """Plug-in covariance of a and b and its Monte-Carlo standard error."""
    ac = a - a.mean()
    bc = b - b.mean()
    prod = ac * bc
    return prod.mean(), prod.std() / np.sqrt(a.size)


_ACCEPTANCE_LINES = []


@pytest.fixture
def record():
    """Log one acceptance line; the lines are printed together after the run."""
    def _record(label, passed, detail=""):
        _ACCEPTANCE_LINES.append(f"{label}: {'PASS' if passed else 'FAIL'}  {detail}".rstrip())
        return passed
    return _record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

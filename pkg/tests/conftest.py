import numpy as np
import pytest

from lvsurgery import Params

CHAOTIC = Params(0.01305, 0.0145, 5.5)
STABLE = Params(0.029, 0.0145, 5.5)
SWEEP_A = (0.01305, 0.01335, 0.01365, 0.01395, 0.01425)

_ACCEPTANCE: list[tuple[str, bool, str]] = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def record():
    """Log one acceptance criterion; the summary is printed at session end."""
    def _record(name: str, passed: bool, detail: str = "") -> bool:
        _ACCEPTANCE.append((name, bool(passed), detail))
        return passed
    return _record


def random_params(rng, n):
    A = 10 ** rng.uniform(-4, 0, n)
    B = 10 ** rng.uniform(-4, 0, n)
    C = rng.uniform(0, 10, n)
    return [Params(a, b, c) for a, b, c in zip(A, B, C)]


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {name}" + (f" -- {detail}" if detail else ""))

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from lpkdv.lattice import LatticeParams
from lpkdv.soliton import SolitonMode, SolitonSpec, soliton_grid

settings.register_profile(
    "lpkdv", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("lpkdv")


@pytest.fixture(scope="session")
def p21():
    return LatticeParams(2.0, 1.0)


@pytest.fixture(scope="session")
def one_sol(p21):
    return soliton_grid(SolitonSpec.single(0.5, 1.0), p21, -20, -20, 40, 40)


@pytest.fixture(scope="session")
def two_sol(p21):
    spec = SolitonSpec((SolitonMode(0.5, 1.0), SolitonMode(0.8, 2.0)))
    return soliton_grid(spec, p21, -20, -20, 40, 40)


@pytest.fixture
def rng():
    return np.random.default_rng(7)


ACCEPTANCE_LINES = []


@pytest.fixture
def report_line():
    """Record one pass/fail line per acceptance criterion and print it."""

    def record(criterion, checks):
        ok = all(passed for _, passed in checks)
        detail = "; ".join(f"{text} [{'ok' if passed else 'FAIL'}]" for text, passed in checks)
        line = f"criterion {criterion:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)

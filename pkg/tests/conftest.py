import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from pinchnoma.model import SystemConfig, UserPair

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_users(seed: int, side: float = 5.0) -> UserPair:
    rng = np.random.default_rng(seed)
    return UserPair(*(float(v) for v in rng.uniform(0.0, side, 4)))


@pytest.fixture
def cfg():
    return SystemConfig.from_units()


@pytest.fixture
def users():
    return UserPair(0.5, 1.0, 4.0, 3.5)


ACCEPTANCE_LINES: list[str] = []


def report(criterion: int, ok: bool, detail: str) -> str:
    line = f"criterion {criterion:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return line


def info(criterion: int, detail: str) -> None:
    line = f"criterion {criterion:>2}: info  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

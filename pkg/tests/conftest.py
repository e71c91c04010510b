import time

import numpy as np
import pytest

SUITE_BUDGET_S = 60.0
_acceptance_lines: list[tuple[str, bool, str]] = []
_start = [0.0]


def record(criterion: str, passed: bool, detail: str = "") -> None:
    _acceptance_lines.append((criterion, passed, detail))


def random_complex(rng, *shape):
    return rng.uniform(-1, 1, shape) + 1j * rng.uniform(-1, 1, shape)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_sessionstart(session):
    _start[0] = time.perf_counter()


def pytest_sessionfinish(session, exitstatus):
    elapsed = time.perf_counter() - _start[0]
    session.config._cmvm_elapsed = elapsed
    if _acceptance_lines and elapsed > SUITE_BUDGET_S and exitstatus == 0:
        session.exitstatus = 1


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _acceptance_lines:
        return
    elapsed = getattr(config, "_cmvm_elapsed", time.perf_counter() - _start[0])
    tr = terminalreporter
    tr.section("acceptance criteria")
    for criterion, passed, detail in _acceptance_lines:
        tr.write_line(f"[{'PASS' if passed else 'FAIL'}] {criterion}" + (f"  ({detail})" if detail else ""))
    ok = elapsed <= SUITE_BUDGET_S
    tr.write_line(f"[{'PASS' if ok else 'FAIL'}] 10. suite runtime {elapsed:.1f}s <= {SUITE_BUDGET_S:.0f}s")

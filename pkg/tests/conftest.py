import random
import time
from contextlib import contextmanager

import pytest

_ACCEPTANCE: list[tuple[int, str, bool, float, str]] = []


@pytest.fixture
def rng():
    return random.Random(20240601)


@pytest.fixture
def criterion():
    """Time a block, enforce its limit and record a pass/fail line for the summary."""

    @contextmanager
    def run(number: int, title: str, limit: float):
        start = time.perf_counter()
        try:
            yield
            elapsed = time.perf_counter() - start
            assert elapsed < limit, f"took {elapsed:.2f}s, limit {limit}s"
        except BaseException as exc:
            elapsed = time.perf_counter() - start
            _ACCEPTANCE.append((number, title, False, elapsed, str(exc).splitlines()[0] if str(exc) else type(exc).__name__))
            raise
        _ACCEPTANCE.append((number, title, True, elapsed, f"limit {limit}s"))

    return run


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, ok, elapsed, detail in sorted(_ACCEPTANCE):
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"[{status}] {number}. {title} ({elapsed:.2f}s; {detail})")

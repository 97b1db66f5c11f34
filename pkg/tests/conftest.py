import time
from contextlib import contextmanager

import pytest

_RESULTS: list[tuple[int, str, bool, float, str]] = []


class Criterion:
    @contextmanager
    def __call__(self, number: int, title: str, budget: float):
        t0 = time.perf_counter()
        try:
            yield
        except BaseException as exc:
            _RESULTS.append((number, title, False, time.perf_counter() - t0,
                             type(exc).__name__))
            raise
        took = time.perf_counter() - t0
        ok = took <= budget
        _RESULTS.append((number, title, ok, took,
                         "" if ok else f"over the {budget:.0f} s limit"))
        assert ok, f"criterion {number} took {took:.1f} s, limit {budget:.0f} s"


@pytest.fixture
def criterion():
    return Criterion()


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, ok, took, why in sorted(_RESULTS):
        line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'} {took:8.2f} s  {title}"
        terminalreporter.write_line(line + (f"  ({why})" if why else ""))

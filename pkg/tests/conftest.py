import re
import time

import pytest

SUITE_START = time.perf_counter()
RUNTIME_TEST = "test_criterion_09_full_suite_runtime"
_criteria: dict[int, list[bool]] = {}


def pytest_collection_modifyitems(items):
    # the whole-suite runtime check has to see every other test finish first
    last = [it for it in items if it.name == RUNTIME_TEST]
    items[:] = [it for it in items if it.name != RUNTIME_TEST] + last


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_criterion_(\d+)_", report.nodeid)
    if not m:
        return
    if report.when == "call" or report.outcome != "passed":
        _criteria.setdefault(int(m.group(1)), []).append(report.outcome == "passed")


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        ok = all(_criteria[n])
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}")


@pytest.fixture(scope="session")
def suite_start():
    return SUITE_START

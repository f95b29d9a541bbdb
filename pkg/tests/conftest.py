import collections
from importlib import resources
from pathlib import Path

import pytest

from doifix.rules import load_ruleset

FIXTURES = Path(str(resources.files("doifix.data") / "fixtures"))

_criteria: dict[int, list[str]] = collections.defaultdict(list)
_titles: dict[int, str] = {}


@pytest.fixture(scope="session")
def extended():
    return load_ruleset("extended")


@pytest.fixture(scope="session")
def baseline():
    return load_ruleset("baseline")


@pytest.fixture(scope="session")
def fixtures_dir():
    return FIXTURES


def pytest_runtest_logreport(report):
    marker = getattr(report, "criterion", None)
    if marker is None:
        return
    n, title = marker
    _titles[n] = title
    if report.when == "call" or report.outcome != "passed":
        _criteria[n].append(report.outcome)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        report = outcome.get_result()
        report.criterion = (marker.args[0], marker.kwargs.get("title", ""))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        ok = all(o == "passed" for o in _criteria[n])
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {_titles.get(n, '')}")

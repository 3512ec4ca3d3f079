import pytest

from crowdflow.config import ScenarioConfig


@pytest.fixture
def small_cfg() -> ScenarioConfig:
    return ScenarioConfig(width=32, height=32, agents_per_side=60, steps=50, repeats=1,
                          seed=11, threads=2)



_CRITERIA: dict[str, list[tuple[str, str]]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(num, title): acceptance criterion")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    marker = _MARKS.get(report.nodeid)
    if marker is None:
        return
    num, title = marker
    outcome = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[report.outcome]
    _CRITERIA.setdefault(num, []).append((title, outcome))


_MARKS: dict[str, tuple[str, str]] = {}


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m is not None:
            _MARKS[item.nodeid] = (str(m.args[0]), m.args[1])


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA, key=lambda k: (int(k.rstrip("abc")), k)):
        results = _CRITERIA[num]
        outcomes = {o for _, o in results}
        # parametrized criteria collapse to one line; any failure fails the criterion
        outcome = next((o for o in ("FAIL", "SKIP") if o in outcomes), "PASS")
        terminalreporter.write_line(f"criterion {num:>3}: {outcome}  {results[0][0]}")

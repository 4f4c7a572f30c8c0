import pytest

from podar import build_grid_scenarios

# Lines printed at the end of the run, one per acceptance criterion.
_CRITERIA = []


@pytest.fixture(scope="session")
def grid():
    return build_grid_scenarios()


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        status = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[rep.outcome]
        detail = getattr(item, "criterion_detail", "")
        _CRITERIA.append(f"{status}  {marker.args[0]}" + (f"  ({detail})" if detail else ""))


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion test")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for line in _CRITERIA:
        terminalreporter.write_line(line)

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

# acceptance tests are tagged with @pytest.mark.criterion(num, "text");
# the summary below prints one PASS/FAIL line per criterion even when
# stdout capture is on
_TAGGED: dict[str, tuple[int, str]] = {}
_RESULTS: dict[str, str] = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "criterion(num, text): acceptance criterion with its tolerance"
    )


def pytest_collection_modifyitems(items):
    for item in items:
        marker = item.get_closest_marker("criterion")
        if marker is not None:
            _TAGGED[item.nodeid] = (marker.args[0], marker.args[1])


def pytest_runtest_logreport(report):
    if report.nodeid not in _TAGGED:
        return
    if report.when == "call" or report.failed:
        outcome = "PASS" if report.passed else "FAIL"
        if report.skipped:
            outcome = "SKIP"
        _RESULTS[report.nodeid] = outcome


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    rows = sorted(
        (num, text, _RESULTS[nodeid])
        for nodeid, (num, text) in _TAGGED.items()
        if nodeid in _RESULTS
    )
    for num, text, outcome in rows:
        terminalreporter.write_line(f"criterion {num:>2} {outcome}  {text}")

import pytest

_results: dict[int, list] = {}
_notes: dict[int, str] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion exercised by the test")


@pytest.fixture
def note(request):
    """Record a one-line measurement for the acceptance summary."""
    marker = request.node.get_closest_marker("criterion")

    def _note(text):
        if marker:
            n = marker.args[0]
            _notes[n] = f"{_notes[n]}; {text}" if n in _notes else text

    return _note


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker and (rep.when == "call" or rep.failed):
        _results.setdefault(marker.args[0], []).append(rep.passed)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_results):
        verdict = "PASS" if all(_results[n]) else "FAIL"
        extra = f"  ({_notes[n]})" if n in _notes else ""
        terminalreporter.write_line(f"criterion {n}: {verdict}{extra}")

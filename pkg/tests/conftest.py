import pytest

_RESULTS = {}


class AcceptanceRecorder:
    """Records one verdict per numbered criterion; the summary prints them in order."""

    def check(self, number, title, passed, detail=""):
        _RESULTS[number] = (title, bool(passed), detail)
        assert passed, f"criterion {number} ({title}) failed: {detail}"


@pytest.fixture
def acceptance():
    return AcceptanceRecorder()


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        title, passed, detail = _RESULTS[number]
        verdict = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{number:2d}] {verdict}  {title}: {detail}")

import pytest

_RESULTS = []


@pytest.fixture
def criterion():
    """Record one acceptance line, then assert it."""

    def record(ident, title, passed, detail=""):
        _RESULTS.append((ident, title, bool(passed), detail))
        assert passed, f"{ident} {title}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for ident, title, passed, detail in _RESULTS:
        tr.write_line(f"{'PASS' if passed else 'FAIL'}  {ident:<6} {title}  [{detail}]")

import pytest

from kbqa.fixtures import fixture_pipeline, fixture_questions

_CRITERIA: dict[int, tuple[bool, str]] = {}


@pytest.fixture(scope="session")
def zh_pipeline():
    return fixture_pipeline("zh")


@pytest.fixture(scope="session")
def zh_questions():
    return fixture_questions("zh")


@pytest.fixture(scope="session")
def en_pipeline():
    return fixture_pipeline("en")


@pytest.fixture
def criterion():
    """Record the outcome of an acceptance criterion for the summary."""
    def record(number: int, ok: bool, detail: str) -> None:
        _CRITERIA[number] = (ok, detail)
        print(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        ok, detail = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")

import pytest
from hypothesis import settings

from orthoheun.mpcore import PrecisionContext

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def ctx60():
    return PrecisionContext(60, 20)


@pytest.fixture(scope="session")
def ctx100():
    return PrecisionContext(100, 30)


_CRITERIA: dict = {}


@pytest.fixture
def criterion():
    """record(k, passed, detail): one entry per check; the summary prints one line per criterion."""

    def record(k, passed, detail):
        _CRITERIA.setdefault(k, []).append((bool(passed), detail))
        print(f"criterion {k}: {'pass' if passed else 'FAIL'}  {detail}")

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_CRITERIA):
        rows = _CRITERIA[k]
        ok = all(p for p, _ in rows)
        failed = [d for p, d in rows if not p]
        detail = "; ".join(failed) if failed else f"{len(rows)} checks"
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")

import pytest

ACCEPTANCE_RESULTS: dict[int, tuple[bool, str]] = {}


def record(criterion: int, passed: bool, detail: str) -> None:
    """Store the verdict of one acceptance criterion for the end-of-run summary."""
    prev = ACCEPTANCE_RESULTS.get(criterion)
    if prev is not None:
        passed = passed and prev[0]
        detail = prev[1] + "; " + detail
    ACCEPTANCE_RESULTS[criterion] = (passed, detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'} | {detail}")


@pytest.fixture
def rng():
    import numpy as np

    return np.random.default_rng(20240601)

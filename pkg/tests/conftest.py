import pytest

# criterion number -> list of (passed, detail); filled by the acceptance suite
_CRITERIA: dict[int, list[tuple[bool, str]]] = {}
N_CRITERIA = 10


@pytest.fixture
def record_criterion():
    def record(number: int, passed: bool, detail: str) -> None:
        _CRITERIA.setdefault(number, []).append((bool(passed), detail))
        print(f"criterion {number}: {'PASS' if passed else 'FAIL'} {detail}")

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in range(1, N_CRITERIA + 1):
        parts = _CRITERIA.get(n)
        if not parts:
            terminalreporter.write_line(f"criterion {n:2d}: NOT RECORDED (deselected, or errored before measuring)")
            continue
        ok = all(p for p, _ in parts)
        detail = "; ".join(d for _, d in parts)
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")

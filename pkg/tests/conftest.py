import numpy as np
import pytest

_ACCEPTANCE: list[str] = []


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(20240611))


@pytest.fixture
def criterion():
    """Record one acceptance verdict; the line is printed now and in the session summary."""

    def record(number: int, title: str, ok: bool, detail: str = "") -> bool:
        line = f"{'PASS' if ok else 'FAIL'} criterion {number:2d}: {title}" + (f" ({detail})" if detail else "")
        print(line)
        _ACCEPTANCE.append(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)

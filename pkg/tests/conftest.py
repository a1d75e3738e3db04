from __future__ import annotations

import math

import pytest

_VERDICTS: list[str] = []


def same_digits(value: float, reference: float, digits: int) -> bool:
    """True when ``value`` agrees with ``reference`` to ``digits`` significant digits.

    Agreement means both round to the same ``digits``-digit mantissa, or the
    difference is at most half a unit in the last kept digit of ``reference``.
    """
    if not (math.isfinite(value) and math.isfinite(reference)):
        return False
    if reference == 0.0:
        return value == 0.0
    if float(f"{value:.{digits - 1}e}") == float(f"{reference:.{digits - 1}e}"):
        return True
    exponent = math.floor(math.log10(abs(reference)))
    return abs(value - reference) <= 0.5 * 10.0 ** (exponent - digits + 1)


@pytest.fixture
def verdict():
    """Record one acceptance line; the lines are echoed in the terminal summary."""

    def record(label: str, ok: bool, detail: str) -> None:
        line = f"{label}: {'PASS' if ok else 'FAIL'} | {detail}"
        _VERDICTS.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in _VERDICTS:
            terminalreporter.write_line(line)

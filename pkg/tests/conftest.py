from __future__ import annotations

import functools

from sgpoly.laplacian import derive_params
from sgpoly.monomials import build_table


@functools.lru_cache(maxsize=None)
def exact_table(r: str, jmax: int):
    return build_table(derive_params(r), jmax)


ACCEPTANCE_LINES: list[str] = []


def record(criterion: int, passed: bool, detail: str) -> None:
    line = f"criterion {criterion}: {'PASS' if passed else 'FAIL'} - {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)

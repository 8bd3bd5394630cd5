"""Shared fixtures and the per-criterion acceptance report."""

import sys
from collections import defaultdict
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

CRITERIA = {
    1: "Z_B CDF, d=1, desk scale",
    2: "Z_B quantile, d=1, desk scale",
    3: "Z_B CDF, d=2, desk scale",
    4: "duality of kinds 1/2 and symmetry of kind 3",
    5: "immersion oracle suite",
    6: "posterior algebra",
    7: "coverage study f2, n=200",
    8: "scale invariance of the sign functional",
    9: "CLI determinism across worker counts",
}

_outcomes: dict[int, list[bool]] = defaultdict(list)
_details: dict[int, list[str]] = defaultdict(list)


@pytest.fixture
def report(request):
    """``report(text)`` attaches a measured value to the test's criterion line."""
    marker = request.node.get_closest_marker("criterion")
    number = marker.args[0] if marker else 0

    def add(text):
        _details[number].append(text)
        print(f"criterion {number}: {text}")

    return add


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.failed):
        _outcomes[marker.args[0]].append(rep.passed)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    tr = terminalreporter
    tr.write_sep("=", "acceptance criteria")
    for n in sorted(CRITERIA):
        if n not in _outcomes:
            continue
        status = "PASS" if all(_outcomes[n]) else "FAIL"
        detail = "; ".join(_details.get(n, []))
        line = f"criterion {n} [{status}] {CRITERIA[n]}"
        tr.write_line(f"{line}: {detail}" if detail else line)

"""Scoreboard for the acceptance suite: one verdict line per criterion.

Tests named ``test_criterion_<n>_*`` in test_acceptance.py are grouped by
number.  A criterion passes when every clause passed outright; clauses that
are known to be unattainable are marked xfail(strict=True) and turn the
verdict into an expected failure, which is reported as such rather than
hidden.  Anything else (a plain failure, an xpass, an error) is unexpected.
"""

import re

_CRITERION = re.compile(r"test_acceptance\.py::test_criterion_(\d+)_")

_TITLES = {
    1: "classical Borel catalog: datum solved, relations evaluated exactly",
    2: "canonical pairs embed, including the affine generalized pairing",
    3: "quantum Borel catalog under the computed orientation",
    4: "omega scaling table and quantum canonical pairs",
    5: "bounded-degree confluence and strategy-independent normal forms",
    6: "negative controls are detected and reported",
    7: "plain versus localized window conditions, both reported",
    8: "exact arithmetic throughout; denominators factored by the witness",
}


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    buckets = {}
    for category, reports in terminalreporter.stats.items():
        for report in reports:
            nodeid = getattr(report, "nodeid", "")
            match = _CRITERION.search(nodeid)
            if not match or getattr(report, "when", "call") != "call":
                continue
            buckets.setdefault(int(match.group(1)), []).append(category)
    if not buckets:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number in sorted(_TITLES):
        categories = buckets.get(number)
        if categories is None:
            terminalreporter.write_line(f"criterion {number}: NOT RUN - {_TITLES[number]}")
            continue
        expected_red = categories.count("xfailed")
        clean = all(c in ("passed", "xfailed") for c in categories)
        if not clean:
            verdict = "FAIL"
        elif expected_red:
            verdict = f"FAIL (expected: {expected_red} clause(s) red by design analysis)"
        else:
            verdict = "PASS"
        terminalreporter.write_line(f"criterion {number}: {verdict} - {_TITLES[number]}")

import collections

import pytest

CRITERIA = {
    1: "volume conservation, 5 classes x 20 states on [0, 50]",
    2: "Heisenberg numeric flow vs closed form on [0, 100]",
    3: "Heisenberg envelope vs both closed-form displays",
    4: "flow right-hand side vs -2 Ric + (2/3) R g",
    5: "SU(2) convergence to (1, 1, 1) by t = 20",
    6: "lemma decay and growth bounds on the grid",
    7: "envelope containment and extremal saturation",
    8: "monotone quantities after tau",
    9: "closed-form theorem bounds contain the envelope",
    10: "tau stability under grid refinement",
    11: "byte-identical reruns",
}

_outcomes = collections.defaultdict(list)


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "acceptance(n): test belongs to numbered acceptance criterion n"
    )


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        _outcomes[marker.args[0]].append((item.name, report.passed))


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(CRITERIA):
        results = _outcomes.get(n)
        if not results:
            tr.write_line(f"criterion {n:2d} NOT RUN  {CRITERIA[n]}")
            continue
        ok = all(passed for _, passed in results)
        status = "PASS" if ok else "FAIL"
        tr.write_line(f"criterion {n:2d} {status:7s}  {CRITERIA[n]}")
        for name, passed in results:
            if not passed:
                tr.write_line(f"              failed: {name}")

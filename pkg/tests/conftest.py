import os
import sys

from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

_criteria: dict[str, tuple[str, list[str]]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(num, label): acceptance criterion check")


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("criterion")
    if mark is None or call.when != "call" and not (call.when == "setup" and call.excinfo):
        return
    num, label = mark.args
    outcome = "FAIL" if call.excinfo is not None else "PASS"
    _, outcomes = _criteria.setdefault(str(num), (label, []))
    outcomes.append(outcome)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_criteria, key=lambda s: int(s)):
        label, outcomes = _criteria[num]
        verdict = "FAIL" if "FAIL" in outcomes else "PASS"
        terminalreporter.write_line(f"criterion {num} {verdict}: {label}")

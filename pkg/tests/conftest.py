import os

from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

_ACCEPTANCE: dict[int, tuple[str, str]] = {}


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    marker = "test_acceptance.py::test_criterion_"
    if marker not in report.nodeid:
        return
    tail = report.nodeid.split(marker, 1)[1]
    num = int(tail.split("_", 1)[0])
    _ACCEPTANCE[num] = (tail.split("_", 1)[1] if "_" in tail else "",
                        "PASS" if report.passed else "FAIL")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_ACCEPTANCE):
        name, verdict = _ACCEPTANCE[num]
        terminalreporter.write_line(f"[{verdict}] criterion {num}: {name.replace('_', ' ')}")

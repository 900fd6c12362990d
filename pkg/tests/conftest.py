import pytest

_criteria = []


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        num, _, title = report.nodeid.split("::")[-1][len("test_criterion_"):].partition("_")
        _criteria.append((int(num), f"criterion {num:>2} {title.replace('_', ' ')}: "
                                    f"{'PASS' if report.passed else 'FAIL'}"))


def pytest_terminal_summary(terminalreporter):
    if _criteria:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_criteria):
            terminalreporter.write_line(line)

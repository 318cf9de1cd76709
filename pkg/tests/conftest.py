import re

_CRITERION = re.compile(r"test_criterion_(\d+)_")


def pytest_terminal_summary(terminalreporter):
    lines = []
    for status in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(status, []):
            if getattr(report, "when", "call") != "call" and status == "passed":
                continue
            match = _CRITERION.search(report.nodeid)
            if not match:
                continue
            detail = dict(report.user_properties).get("detail", "")
            verdict = "PASS" if status == "passed" else "FAIL"
            lines.append((int(match.group(1)), f"criterion {match.group(1)}: {verdict}  {detail}"))
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)

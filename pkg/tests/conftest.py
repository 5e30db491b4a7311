import sys


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if module is None:
        return
    terminalreporter.section("acceptance criteria")
    for number, title in module.CRITERIA.items():
        status, detail = module.RESULTS.get(number, ("NOT RUN", ""))
        line = f"criterion {number} [{title}]: {status}"
        terminalreporter.write_line(f"{line}  {detail}" if detail else line)

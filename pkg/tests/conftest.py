import re


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One PASS/FAIL line per acceptance criterion at the end of the run."""
    rows = []
    for status in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(status, []):
            if "test_acceptance" in rep.nodeid and getattr(rep, "when", "call") == "call":
                name = rep.nodeid.split("::")[-1]
                match = re.search(r"criterion_(\d+)", name)
                order = int(match.group(1)) if match else 99
                rows.append((order, name, "PASS" if status == "passed" else "FAIL"))
    if rows:
        terminalreporter.write_sep("=", "acceptance criteria")
        for order, name, status in sorted(rows):
            terminalreporter.write_line(f"[criterion {order:2d}] {status}  {name}")

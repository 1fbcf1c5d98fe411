import os
import re
import sys

from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile(
    "default", settings(suppress_health_check=[HealthCheck.too_slow], max_examples=60, deadline=None)
)
settings.load_profile("default")

_CRIT = re.compile(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)")


def pytest_terminal_summary(terminalreporter):
    rows = {}
    for key in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(key, []):
            if getattr(rep, "when", "call") != "call" and key != "error":
                continue
            m = _CRIT.search(rep.nodeid)
            if m:
                rows[int(m.group(1))] = (m.group(2).replace("_", " "), "PASS" if key == "passed" else "FAIL")
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(rows):
        name, verdict = rows[num]
        terminalreporter.write_line(f"criterion {num:2d}: {verdict}  {name}")

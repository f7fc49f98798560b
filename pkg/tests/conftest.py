import os

from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("thorough", max_examples=400, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def pytest_terminal_summary(terminalreporter):
    """One line per acceptance criterion, whatever the verbosity."""
    lines = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            if getattr(rep, "when", "call") != "call" and outcome != "error":
                continue
            if "test_acceptance.py::" not in rep.nodeid:
                continue
            name = rep.nodeid.split("::", 1)[1]
            doc = dict(rep.user_properties).get("criterion", "")
            lines.append((name, "PASS" if outcome == "passed" else "FAIL", doc))
    if lines:
        terminalreporter.section("acceptance criteria")
        for name, status, doc in sorted(lines):
            terminalreporter.write_line(f"{status}  {name}  {doc}")

from __future__ import annotations

from hypothesis import HealthCheck, settings

settings.register_profile("bulk", max_examples=10_000, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large])
BULK = settings.get_profile("bulk")
settings.register_profile("quick", max_examples=300, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large])
QUICK = settings.get_profile("quick")

ACCEPTANCE: dict = {}


def record(name: str, ok: bool, detail: str = "") -> bool:
    ACCEPTANCE[name] = (bool(ok), detail)
    return bool(ok)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, (ok, detail) in ACCEPTANCE.items():
        line = f"{'PASS' if ok else 'FAIL'}  {name}"
        terminalreporter.write_line(line + (f"  ({detail})" if detail else ""))

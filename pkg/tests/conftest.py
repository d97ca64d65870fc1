import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

_CRITERIA = {}


@pytest.fixture
def rng():
    return np.random.default_rng(42)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    entry = _CRITERIA.setdefault(number, {"title": title, "ok": True, "ran": False, "notes": []})
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        entry["ran"] = True
        entry["ok"] &= report.outcome == "passed"
        entry["notes"] += [v for k, v in item.user_properties if k == "measured"]


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        e = _CRITERIA[number]
        status = "PASS" if e["ok"] and e["ran"] else "FAIL"
        notes = "; ".join(e["notes"])
        terminalreporter.write_line(f"criterion {number}: {status}  {e['title']}" + (f"  [{notes}]" if notes else ""))

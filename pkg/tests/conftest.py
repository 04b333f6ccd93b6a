import sys
from pathlib import Path

import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

_criteria = {}


def pytest_runtest_logreport(report):
    crit = dict(report.user_properties).get("criterion")
    if crit is None:
        return
    entry = _criteria.setdefault(crit, {"outcome": "PASS", "props": {}})
    if report.failed:
        entry["outcome"] = "FAIL"
    elif report.skipped and report.when == "setup":
        entry["outcome"] = "SKIP"
    entry["props"].update({k: v for k, v in report.user_properties if k != "criterion"})


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for crit in sorted(_criteria):
        e = _criteria[crit]
        title = e["props"].pop("title", "")
        detail = ", ".join(f"{k}={v}" for k, v in e["props"].items())
        tr.write_line(f"criterion {crit}: {e['outcome']}  {title}" + (f"  [{detail}]" if detail else ""))


@pytest.fixture
def criterion(record_property):
    """Tag a test with its acceptance criterion and attach measured values."""

    def tag(number, title, **values):
        record_property("criterion", number)
        record_property("title", title)
        for k, v in values.items():
            record_property(k, v)

    return tag

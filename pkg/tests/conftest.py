import sys
from importlib.resources import files
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from plead.delivery import DeliveryEngine, read_events_file  # noqa: E402
from plead.matcher import load_patterns_file  # noqa: E402
from plead.provenance import ingest_file  # noqa: E402
from plead.registry import load_registry_file  # noqa: E402
from plead.render import load_templates_file  # noqa: E402

DATA = Path(str(files("plead") / "data"))
FIXED_AT = "2021-03-01T00:00:00Z"


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA


@pytest.fixture(scope="session")
def gdpr():
    return load_registry_file(DATA / "gdpr_art22.json")


@pytest.fixture(scope="session")
def trail():
    return ingest_file(DATA / "loan_trail.jsonl")


@pytest.fixture(scope="session")
def patterns():
    return load_patterns_file(DATA / "loan_patterns.json")


@pytest.fixture(scope="session")
def templates(gdpr):
    return load_templates_file(DATA / "loan_templates.json", gdpr)


@pytest.fixture(scope="session")
def events():
    return read_events_file(DATA / "loan_events.jsonl")


@pytest.fixture
def engine(gdpr, patterns, templates):
    return DeliveryEngine(gdpr, patterns, templates, FIXED_AT)


# acceptance summary ---------------------------------------------------------

_criteria: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::" not in report.nodeid:
        return
    name = report.nodeid.split("::", 1)[1]
    if report.when == "call" or report.outcome != "passed":
        previous = _criteria.get(name)
        if previous != "FAIL":
            _criteria[name] = "PASS" if report.outcome == "passed" else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name, status in sorted(_criteria.items()):
        terminalreporter.write_line(f"{status}  {name}")
    passed = sum(s == "PASS" for s in _criteria.values())
    terminalreporter.write_line(f"{passed}/{len(_criteria)} criteria passed")

from pathlib import Path

import pytest

from persona_lab.experiment import ExperimentConfig, bootstrap_population
from persona_lab.liwc import parse_dic
from persona_lab.report import demo_dictionary_path
from persona_lab.simulate import synthetic_backend

GOLDEN = Path(__file__).parent / "golden"

SMALL_DIC = "%\n1\tposemo\n2\tnegemo\n%\nhappy\t1\nhate\t2\nadmir*\t1\n"


@pytest.fixture
def golden():
    return lambda name: (GOLDEN / name).read_text(encoding="utf-8")


@pytest.fixture
def small_dic():
    return parse_dic(SMALL_DIC)


@pytest.fixture(scope="session")
def demo_dic():
    return parse_dic(demo_dictionary_path().read_text(encoding="utf-8"))


@pytest.fixture
def small_config():
    return ExperimentConfig(population_per_group=4, rng_seed=7)


@pytest.fixture
def small_population(small_config):
    return bootstrap_population(small_config)


@pytest.fixture
def mock_backend():
    return synthetic_backend()


# ---- acceptance reporting: one PASS/FAIL line per criterion at the end of the run

_CRITERIA: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or (rep.when != "call" and not rep.failed):
        return
    number, title = mark.args
    entry = _CRITERIA.setdefault(number, {"title": title, "ok": True, "failed": []})
    if rep.failed:
        entry["ok"] = False
        entry["failed"].append(item.name)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        e = _CRITERIA[number]
        status = "PASS" if e["ok"] else "FAIL"
        extra = f"  (failed: {', '.join(e['failed'])})" if e["failed"] else ""
        terminalreporter.write_line(f"criterion {number}: {status}  {e['title']}{extra}")

import os
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "texturalyze",
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("texturalyze")

ACCEPTANCE_RESULTS: dict[str, list[tuple[str, str]]] = {}


def pytest_addoption(parser):
    parser.addoption(
        "--dataset",
        action="store",
        default=None,
        help="directory holding the released study data (curves/, survey.csv, config.txt)",
    )


@pytest.fixture(scope="session")
def dataset_dir(request):
    path = request.config.getoption("--dataset") or os.environ.get("TEXTURALYZE_TEST_DATASET")
    return Path(path) if path else None


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        reason = ""
        if rep.skipped and isinstance(rep.longrepr, tuple):
            reason = rep.longrepr[2].removeprefix("Skipped: ")
        ACCEPTANCE_RESULTS.setdefault(marker.args[0], []).append((rep.outcome, reason))


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(label): acceptance criterion covered by this test")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(ACCEPTANCE_RESULTS, key=lambda s: (int(s.split(".")[0]), s)):
        outcomes = ACCEPTANCE_RESULTS[label]
        kinds = {o for o, _ in outcomes}
        note = ""
        if "failed" in kinds:
            status = "FAIL"
        elif kinds == {"skipped"}:
            status, note = "SKIP", f"  [{outcomes[0][1]}]"
        else:
            status = "PASS"
        terminalreporter.write_line(f"{status:<5} {label}{note}")

import pytest

# criterion id -> (passed, detail); filled by the acceptance tests
ACCEPTANCE = {}


@pytest.fixture
def criterion(request):
    """Record the verdict of one acceptance criterion for the summary."""
    cid = request.node.get_closest_marker("criterion").args[0]
    ACCEPTANCE[cid] = [False, "did not finish"]

    def record(passed, detail):
        ACCEPTANCE[cid] = [bool(passed), detail]
        return passed

    return record


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark and rep.when == "call" and rep.failed:
        cid = mark.args[0]
        passed, detail = ACCEPTANCE.get(cid, [False, "did not finish"])
        ACCEPTANCE[cid] = [False, detail if not passed else f"{detail} (assertion failed)"]


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[cid]
        terminalreporter.write_line(f"criterion {cid:>2}: {'PASS' if passed else 'FAIL'}  {detail}")

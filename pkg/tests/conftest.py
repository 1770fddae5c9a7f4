import pytest

from ranktower import samples

_CRITERIA = {}


@pytest.fixture(scope="session")
def e1():
    return samples.e1()


@pytest.fixture(scope="session")
def tx1():
    return samples.p1_tx1()


@pytest.fixture(scope="session")
def ebase():
    return samples.elliptic_example()


@pytest.fixture(scope="session")
def ydep():
    return samples.elliptic_ydep()


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        _CRITERIA[marker.args[0]] = (marker.args[1], rep.outcome)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(num, title): acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        title, outcome = _CRITERIA[num]
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {num:2d}: {status}  {title}")

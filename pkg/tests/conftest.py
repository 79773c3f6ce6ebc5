import pytest

from compactpack import fixtures
from compactpack.packing import verify_compact_2d

PLANAR = [
    "hexagonal",
    "two-size-0011",
    "two-size-111",
    "two-size-0111",
    "two-size-1111",
    "two-size-00101",
    "two-size-00011",
    "two-size-01011",
    "two-size-00111",
    "two-size-01111",
    "figure4",
]


@pytest.fixture(scope="session")
def corpus():
    """Shipped fixtures, loaded from the packaged JSON files."""
    return {name: fixtures.load_fixture(name) for name in PLANAR + ["fcc-octahedral"]}


@pytest.fixture(scope="session")
def reports(corpus):
    return {name: verify_compact_2d(corpus[name]) for name in PLANAR}


# -- acceptance summary: one line per criterion -------------------------------------

_CRITERIA: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or (rep.when != "call" and rep.passed):
        return
    number, title = mark.args
    ok = _CRITERIA.get(number, (title, True))[1] and rep.passed
    _CRITERIA[number] = (title, ok)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, ok = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {title}")

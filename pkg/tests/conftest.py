import functools

import pytest

from bellscope.polytope import enumerate_facets
from bellscope.scenario import Scenario

CRITERIA = []


@functools.lru_cache(maxsize=None)
def facets_of(name):
    """Facets per scenario, computed once per session."""
    return tuple(enumerate_facets(Scenario.parse(name)))


@pytest.fixture
def facets():
    return facets_of


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for line in CRITERIA:
        terminalreporter.write_line(line)

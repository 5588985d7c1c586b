import json
from importlib import resources

import pytest

from mwrp.grid import ProblemInstance, read_map


def load_oracle_suite():
    """(problem, oracle makespan) pairs from the suite shipped with the package."""
    base = resources.files("mwrp") / "data" / "oracle_suite"
    data = json.loads((base / "suite.json").read_text())
    out = []
    for inst in data["instances"]:
        g = read_map(base / inst["map"])
        out.append((ProblemInstance(g, [tuple(s) for s in inst["starts"]]), inst["oracle_makespan"]))
    return out


@pytest.fixture(scope="session")
def oracle_suite():
    return load_oracle_suite()


_acceptance_lines = pytest.StashKey[list]()


@pytest.fixture(scope="session")
def acceptance_log(request):
    """Collects one pass/fail line per acceptance criterion for the terminal summary."""
    return request.config.stash.setdefault(_acceptance_lines, [])


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_acceptance_lines, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)

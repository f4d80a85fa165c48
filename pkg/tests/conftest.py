import pytest

from threearm import DesignParams, FilterRule, SampleSizes, Scenario

REPORTED_SIZES = {1: (538, 547, 159), 2: (288, 284, 472), 3: (531, 68, 529)}
RATIOS = {1: 1.0, 2: 0.5, 3: 0.0}


@pytest.fixture(scope="session")
def params():
    return DesignParams(sigma=0.5, alpha=0.025, rho=0.5, delta_N=0.1)


@pytest.fixture(scope="session")
def hida():
    return DesignParams(sigma=6.5, alpha=0.025, rho=0.5, delta_N=2.5, delta=2.5)


@pytest.fixture(scope="session")
def filter1():
    return FilterRule.numbered(1)


@pytest.fixture(scope="session")
def scenarios(params):
    return {k: Scenario.from_ratio(params, 0.2, v) for k, v in RATIOS.items()}


@pytest.fixture(scope="session")
def reported_sizes():
    return {k: SampleSizes(*n) for k, n in REPORTED_SIZES.items()}


# acceptance criteria register their outcome here; reported after the run
CRITERIA = {}


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(CRITERIA):
        ok, title, detail = CRITERIA[number]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title} -- {detail}")

import pytest

from ldpc_cran.density_evolution import DeConfig
from ldpc_cran.ensemble import default_palette, regular_distribution
from ldpc_cran.schedulers import ComplexityModel

# filled by test_acceptance.py, printed at the end of the run
ACCEPTANCE = {}


@pytest.fixture(scope="session")
def palette():
    return default_palette()


@pytest.fixture(scope="session")
def model(palette):
    return ComplexityModel(palette, DeConfig())


@pytest.fixture(scope="session")
def reg36():
    return regular_distribution(3, 6)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, line = ACCEPTANCE[n]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {n:>2}. {line}")

import pytest

from refracted_impulse import BROWNIAN_BASE, CRAMER_LUNDBERG_BASE, optimize, theta_basis

SPECS = {"brownian": BROWNIAN_BASE, "cramer_lundberg": CRAMER_LUNDBERG_BASE}

# one line per acceptance criterion, printed at the end of the session
ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture(scope="session", params=sorted(SPECS))
def spec(request):
    return SPECS[request.param]


@pytest.fixture(scope="session")
def bases():
    return {k: theta_basis(s) for k, s in SPECS.items()}


@pytest.fixture(scope="session")
def optima(bases):
    return {k: optimize(tb) for k, tb in bases.items()}


@pytest.fixture
def tb(spec, bases):
    return bases[spec.model.kind]


@pytest.fixture
def opt(spec, optima):
    return optima[spec.model.kind]


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])

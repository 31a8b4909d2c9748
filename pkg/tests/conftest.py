import pytest

from trustregion import BeliefDensity, UtilityCurve

_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def quad():
    return UtilityCurve.quadratic_loss()


@pytest.fixture
def uniform():
    return BeliefDensity.uniform()


@pytest.fixture
def log_score():
    return UtilityCurve.log_score()


@pytest.fixture
def acceptance_log(request):
    """Collects one summary line per acceptance criterion for the terminal report."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])
    return lines.append


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)

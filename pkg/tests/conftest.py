import pytest

from pairpump.config import DEFAULT_SETTINGS


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running numerical checks")


@pytest.fixture(scope="session")
def settings():
    return DEFAULT_SETTINGS


@pytest.fixture(scope="session")
def settings_eta3():
    """Broadening used for finite-lattice comparisons."""
    return DEFAULT_SETTINGS.replace(eta=1e-3)

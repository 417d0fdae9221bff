import pytest

from reconfault.scenario import default_scenario, with_overrides


@pytest.fixture(scope="session")
def default_config():
    return default_scenario()


@pytest.fixture(scope="session")
def aes_config(default_config):
    return with_overrides(default_config, victim_kind="aes")


@pytest.fixture(scope="session")
def quiet_config(default_config):
    """Default scenario with the power-waster grid switched off."""
    return with_overrides(default_config, waster_count=0)

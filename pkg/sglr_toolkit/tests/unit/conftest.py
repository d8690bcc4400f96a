"""Setup shared fixtures for tests
"""
import pytest

from sglr_toolkit.app.families import Bernoulli, Poisson, SubGaussian


@pytest.fixture
def gaussian():
    """Unit variance sub-Gaussian family
    """

    return SubGaussian(sigma=1.0)


@pytest.fixture
def bernoulli():
    """Bernoulli family
    """

    return Bernoulli()


@pytest.fixture
def poisson():
    """Poisson family
    """

    return Poisson()


@pytest.fixture
def scenario_config(tmp_path):
    """Writes a scenario config file and returns its path
    """

    def write(text: str) -> str:
        config_path = tmp_path / "scenario.conf"
        config_path.write_text(text, encoding="utf-8")
        return str(config_path)

    return write

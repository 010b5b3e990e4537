import numpy as np
import pytest

from qiradar import RadarScenario, validate_scenario


@pytest.fixture
def fig5_scenario():
    """The headline comparison point: weak target in a bright background."""
    return validate_scenario(RadarScenario())


@pytest.fixture
def desk_scenario():
    """Desk-scale rescaling of the comparison point for Monte Carlo work."""
    return validate_scenario(RadarScenario(kappa=0.1, n_s=0.1, m_modes=2000))


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)

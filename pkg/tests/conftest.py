import pytest

from rsea import ActuatorParams, ElasticConfig, SpringSpec, nonlinearity_preset


@pytest.fixture
def baseline():
    """Prototype baseline: six pairs, 0.5 mm pre-tension, no offset."""
    return ElasticConfig()


@pytest.fixture
def presets():
    """High / medium / low nonlinearity configurations."""
    return {name: nonlinearity_preset(name) for name in ("high", "medium", "low")}


@pytest.fixture
def actuator():
    return ActuatorParams()


@pytest.fixture
def spring():
    return SpringSpec()

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "ci",
    derandomize=True,
    max_examples=50,
    suppress_health_check=[HealthCheck.too_slow],
    deadline=None,
)
settings.load_profile("ci")


@pytest.fixture(scope="session")
def toy_specs():
    from browniansim import toys
    from browniansim.turing import parse_tm

    return {name: parse_tm(text) for name, text in toys.TOYS.items()}

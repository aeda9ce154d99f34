import pytest

from qees.config import RunConfig
from qees.sampling import build_noise_table

SMALL_TABLE = 200_000


@pytest.fixture(scope="session")
def small_table():
    return build_noise_table(RunConfig().table_seed, SMALL_TABLE)


@pytest.fixture
def small_config():
    """A quick locomotion run: tiny policy, short episodes."""
    from qees.environment import EnvironmentSpec

    return RunConfig(
        population=20,
        generations=6,
        table_length=SMALL_TABLE,
        hidden=(8,),
        environment=EnvironmentSpec(max_steps=30),
    )


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for num in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[num])

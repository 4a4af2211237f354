import shutil

import pytest
from hypothesis import HealthCheck, settings

from tickbmc import corpus
from tickbmc.smt import SolverConfig

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def pytest_collection_modifyitems(config, items):
    if shutil.which(SolverConfig().command[0]) is None:
        skip = pytest.mark.skip(reason="no SMT solver binary found (pip install z3-solver)")
        for item in items:
            if "solver" in item.keywords:
                item.add_marker(skip)


@pytest.fixture
def toy():
    return corpus.load("toy")


@pytest.fixture
def toy_mutated():
    return corpus.load("toy_mutated")

import numpy as np
import pytest
from hypothesis import settings

from pinnlab.network import LayerSpec

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def paper_spec():
    return LayerSpec.uniform([2, 30, 1], "tanh")


def random_params(spec, rng, scale=0.5):
    from pinnlab.network import param_count, unflatten

    return unflatten(spec, rng.normal(scale=scale, size=param_count(spec)))

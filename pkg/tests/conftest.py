import numpy as np
import pytest

from catzero.measures import uniform_measure
from catzero.spaces import Euclidean, Hyperboloid, Tripod
from catzero.verify import random_tree


@pytest.fixture
def tripod():
    return Tripod()


@pytest.fixture
def leaves(tripod):
    return [tripod.branch_point(i, 1.0) for i in (1, 2, 3)]


@pytest.fixture
def leaf_measure(tripod, leaves):
    return uniform_measure(tripod, leaves)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture(params=["tree", "hyperboloid", "euclidean"])
def space_and_scale(request):
    rng = np.random.default_rng(11)
    if request.param == "tree":
        return random_tree(rng, 9), 1.0
    if request.param == "hyperboloid":
        return Hyperboloid(2), 2.0
    return Euclidean(3), 1.0


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)

import numpy as np
import pytest

from evowalk.graph import gen_clique, gen_lollipop, gen_path

SUITE = {
    "P2": lambda: gen_path(2),
    "P3": lambda: gen_path(3),
    "P4": lambda: gen_path(4),
    "K3": lambda: gen_clique(3),
    "K4": lambda: gen_clique(4),
    "L5_3": lambda: gen_lollipop(5, 3),
}


@pytest.fixture(params=sorted(SUITE))
def suite_graph(request):
    return request.param, SUITE[request.param]()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

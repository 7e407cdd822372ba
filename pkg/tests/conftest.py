import pytest

from qpv.rng import RngStream
from qpv.sk import build_net


@pytest.fixture(scope="session")
def net10():
    # small net shared by the compiler tests; building it is the slow part
    return build_net(10)


@pytest.fixture()
def rng():
    return RngStream(1234, stream=0)

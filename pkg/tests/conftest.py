import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from jordan_cone import Diagonal, DirectSum, Spin, SymMatrix

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ALGEBRAS = [Diagonal(2), Diagonal(3), Diagonal(5), Spin(2), Spin(4), SymMatrix(2), SymMatrix(3),
            SymMatrix(4), DirectSum((Diagonal(2), Spin(3))), DirectSum((SymMatrix(2), SymMatrix(2)))]


def alg_id(alg):
    return alg.short_name()


@pytest.fixture(params=ALGEBRAS, ids=alg_id)
def alg(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

import numpy as np
import pytest

from gofgamma.hankel import default_rule


@pytest.fixture(scope="session")
def rules():
    cache = {}

    def get(alpha):
        if alpha not in cache:
            cache[alpha] = default_rule(alpha)
        return cache[alpha]

    return get


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def null_sim():
    """Cached full-protocol null simulations keyed by (alpha, n)."""
    from gofgamma.nulldist import McProtocol, simulate_null

    cache = {}

    def get(alpha, n):
        key = (float(alpha), int(n))
        if key not in cache:
            cache[key] = simulate_null(alpha, n, McProtocol())
        return cache[key]

    return get

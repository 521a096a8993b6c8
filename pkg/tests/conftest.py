import numpy as np
import pytest

from scattershrink.hpd import random_hpd


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def cgauss(rng, n, p):
    return (rng.standard_normal((n, p)) + 1j * rng.standard_normal((n, p))) / np.sqrt(2)


def rand_hpd(rng, p):
    return random_hpd(p, rng)

import numpy as np
import pytest


def rand_sym(rng, p, scale=1.0):
    A = rng.standard_normal((p, p)) * scale
    return (A + A.T) / 2.0


def rand_psd(rng, p, scale=1.0):
    G = rng.standard_normal((p, p + 2)) * scale
    return G @ G.T / (p + 2)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)

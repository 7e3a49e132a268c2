import numpy as np
import pytest


def random_contraction(rng, n, m=None, lo=0.1, hi=0.9):
    """n x n (or m x n) matrix with singular values drawn from [lo, hi]."""
    m = n if m is None else m
    g = rng.normal(size=(m, n)) + 1j * rng.normal(size=(m, n))
    u, _, vh = np.linalg.svd(g, full_matrices=False)
    s = rng.uniform(lo, hi, min(m, n))
    return u @ np.diag(s) @ vh


def random_state(rng, n):
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    return v / np.linalg.norm(v)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)

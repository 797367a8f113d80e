import numpy as np
import pytest


def unit_stream(rng, T, d, scale=1.0):
    """Random gradient stream with every row norm <= scale (<= 1)."""
    assert scale <= 1.0
    v = rng.standard_normal((T, d))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    radii = scale * rng.uniform(0.0, 1.0, size=(T, 1))
    return v * radii


def rademacher_stream(rng, T, d, scale=1.0):
    """i.i.d. signs, rows normalized to norm == scale."""
    signs = rng.integers(0, 2, size=(T, d)) * 2.0 - 1.0
    return scale * signs / np.sqrt(d)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import strategies as st

from ncharm.nclp import TracedElement


def random_matrix(rng, d):
    return rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))


def random_unitary(rng, d):
    q, r = np.linalg.qr(random_matrix(rng, d))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_traced(rng, dims=(4,), weights=None):
    return TracedElement([random_matrix(rng, d) for d in dims], weights)


@st.composite
def traced_pairs(draw, max_blocks=3, max_dim=4):
    """Two random elements of the same traced algebra, seeded through hypothesis."""
    nb = draw(st.integers(1, max_blocks))
    dims = tuple(draw(st.integers(1, max_dim)) for _ in range(nb))
    weights = tuple(draw(st.floats(0.1, 5.0)) for _ in range(nb))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    return random_traced(rng, dims, weights), random_traced(rng, dims, weights), rng


@pytest.fixture
def rng():
    return np.random.default_rng(20261017)

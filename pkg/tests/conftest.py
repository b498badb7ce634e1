import math

import numpy as np
import pytest
from hypothesis import strategies as st

from triality.states import PreparationParams

angles = st.floats(0.0, math.pi / 2, allow_nan=False)
phases = st.floats(0.0, 2 * math.pi, exclude_max=True, allow_nan=False)
ratios = st.floats(0.0, 50.0, allow_nan=False)

params_strategy = st.builds(PreparationParams, R=ratios, theta=angles, xi=phases)


@pytest.fixture
def rng():
    return np.random.default_rng(20260418)


def random_params(rng, n, r_max=5.0):
    R = rng.uniform(0, r_max, n)
    theta = rng.uniform(0, math.pi / 2, n)
    xi = rng.uniform(0, 2 * math.pi, n)
    return [PreparationParams(*row) for row in zip(R, theta, xi)]


def random_state_vector(rng, dim=4):
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_hermitian(rng, dim=4):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (a + a.conj().T) / 2


def random_density(rng, rank=4):
    a = rng.normal(size=(4, rank)) + 1j * rng.normal(size=(4, rank))
    m = a @ a.conj().T
    return m / np.trace(m).real

import functools

import numpy as np
import pytest
from hypothesis import settings, strategies as st

from spinform.killing_flow import ModifiedConnection, solve_on_chart
from spinform.spin_calculus import Grid
from spinform.surface_charts import catalog

settings.register_profile("spinform", deadline=None, max_examples=60, derandomize=True)
settings.load_profile("spinform")

finite = st.floats(min_value=-10, max_value=10, allow_nan=False, allow_infinity=False)


@st.composite
def spinors(draw):
    z = [draw(finite) for _ in range(4)]
    return np.array([z[0] + 1j * z[1], z[2] + 1j * z[3]])


@st.composite
def vectors(draw, dim=2):
    return np.array([draw(finite) for _ in range(dim)])


@functools.lru_cache(maxsize=None)
def pipeline(name, n=64):
    """Geometric restriction pipeline (T = S/2, ambient eta) on an n x n grid."""
    chart = catalog(name)
    return solve_on_chart(ModifiedConnection.geometric(chart), Grid.on(chart, n))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)

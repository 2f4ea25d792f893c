import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from pertdet.spectral import FourierField, TorusGrid

settings.register_profile(
    "default", max_examples=30, deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


def field_from_seed(grid: TorusGrid, seed: int, band: int, real: bool = True,
                    amplitude: float = 1.0, decay: float = 1.0) -> FourierField:
    rng = np.random.default_rng(seed)
    n = np.arange(-band, band + 1)
    g = rng.standard_normal(n.size) + 1j * rng.standard_normal(n.size)
    c = np.zeros(grid.size, complex)
    c[n + grid.mode_cutoff] = amplitude * g / (1.0 + np.abs(n)) ** decay
    return FourierField(grid, c, real)


@st.composite
def fields(draw, grid=TorusGrid(1.0, 16), max_band=None, real=None,
           amplitude=(0.05, 3.0)):
    """Random band-limited fields built from a drawn seed, band and amplitude."""
    top = grid.mode_cutoff if max_band is None else max_band
    seed = draw(st.integers(0, 2 ** 32 - 1))
    band = draw(st.integers(1, top))
    amp = draw(st.floats(*amplitude))
    is_real = draw(st.booleans()) if real is None else real
    return field_from_seed(grid, seed, band, is_real, amp, draw(st.floats(0.0, 2.0)))


@pytest.fixture
def grid():
    return TorusGrid(1.0, 32)


@pytest.fixture
def cos2(grid):
    """2cos(2πx) on the unit circle."""
    return FourierField.from_modes(grid, {1: 1.0, -1: 1.0}, True)

import numpy as np
import pytest

from scnls import Grid
from scnls.presets import InitialData, gaussian


@pytest.fixture(scope="session")
def grid_1d() -> Grid:
    return Grid(128, 2 * np.pi)


@pytest.fixture(scope="session")
def grid_wide() -> Grid:
    """Production-like cell: wide enough that gaussian tails are < 1e-12."""
    return Grid(512, 16.0)


@pytest.fixture(scope="session")
def gaussian_data(grid_wide) -> InitialData:
    """Complex leading amplitude with Re(conj(a0) a1) not identically zero,
    so the corrector phase is active."""
    g = grid_wide
    a0 = gaussian(g, 1.0, 1.0) * (1 + 0.2j * gaussian(g, 1.0))
    a1 = (0.5 * gaussian(g, 1.2)).astype(complex)
    return InitialData(grid=g, a0=a0, a1=a1,
                       phi0_periodic=np.zeros(g.shape),
                       phi0_wavevector=(0.0,), label="gaussian-complex")


@pytest.fixture(scope="session")
def real_imag_data(grid_wide) -> InitialData:
    """a0 real-valued, a1 purely imaginary: the corrector phase must vanish."""
    g = grid_wide
    a0 = gaussian(g, 1.0, 1.0).astype(complex)
    a1 = 1j * 0.5 * gaussian(g, 1.2)
    return InitialData(grid=g, a0=a0, a1=a1,
                       phi0_periodic=np.zeros(g.shape),
                       phi0_wavevector=(0.0,), label="real-imag")

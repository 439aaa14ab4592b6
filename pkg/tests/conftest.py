import numpy as np
import pytest

from pairforge import layerstack, materials
from pairforge.nonlinear import mode_curves

DEVICE_T = 293.15


@pytest.fixture(scope="session")
def table():
    return materials.default_table()


@pytest.fixture(scope="session")
def device_stack(table):
    return layerstack.load_device(table=table)


@pytest.fixture(scope="session")
def device_curves(device_stack, table):
    """Pump/signal/idler curves at 20 C, wide enough for tuning and SHG scans."""
    return mode_curves(device_stack, DEVICE_T, pump_range=(775.0, 795.0), fundamental_range=(1350.0, 1850.0),
                       pump_step=1.0, fundamental_step=5.0, table=table)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(scope="session")
def pm_line(device_stack, table):
    """Degenerate SH wavelength against temperature over 15-40 C."""
    from pairforge.nonlinear import pm_center_vs_temperature

    return pm_center_vs_temperature(device_stack, np.arange(288.15, 313.16, 5.0), table=table)

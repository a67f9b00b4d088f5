import numpy as np
import pytest

from tiltrotor import Gains, Params


@pytest.fixture(scope="session")
def params():
    return Params()


@pytest.fixture(scope="session")
def gains():
    return Gains()


@pytest.fixture(scope="session")
def params_nosat():
    """Saturation effectively disabled (huge ceiling, zero floor)."""
    return Params(omega_lo=0.0, omega_hi=1e9)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)

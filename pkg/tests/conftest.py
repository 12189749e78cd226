import math

import pytest

from sourceflow.euler import FlowConfig
from sourceflow.isentrope import IsentropeModel, critical_c


@pytest.fixture
def ideal3():
    """Ideal gas, n = 3, R = c = 1."""
    return IsentropeModel.from_c("ideal", 3, 1.0)


@pytest.fixture
def vdw1():
    """Reduced vdW gas, n = 3, c = 1 (f not monotone)."""
    return IsentropeModel.from_c("vdw", 3, 1.0)


@pytest.fixture
def vdw_mono():
    """Reduced vdW gas, n = 3, c = 2 c_crit (f monotone)."""
    return IsentropeModel.from_c("vdw", 3, 2.0 * critical_c(3))


@pytest.fixture
def flow_unit(ideal3):
    """Ideal n = 3, R = c = I = 1, rho_inf = 1 (C0 = 5/2)."""
    return FlowConfig(ideal3, 1.0, rho_inf=1.0)


def vdw_s0(s0, n=3):
    """vdW model at s0 = exp(sigma0)."""
    return IsentropeModel("vdw", n, math.log(s0))

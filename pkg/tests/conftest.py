"""Shared canonical fixture: a 2 Ah cell with a linear OCV curve."""

import pytest

from soplab import BatteryParams, BatteryState, OcvCurve, Soa, Window


@pytest.fixture
def params():
    return BatteryParams(r0=0.05, r1=0.03, tau=10.0, capacity_ah=2.0, coulombic_eff=1.0)


@pytest.fixture
def linear_curve():
    # OCV = 3.0 + 1.2 * soc
    return OcvCurve(((0.0, 3.0), (1.0, 4.2)))


@pytest.fixture
def knee_curve():
    # slope 1.0 below soc 0.5, slope 1.4 above
    return OcvCurve(((0.0, 3.0), (0.5, 3.5), (1.0, 4.2)))


@pytest.fixture
def soa():
    return Soa(vt_min=2.8, vt_max=4.3, i_max_dis=10.0, i_max_chg=-4.0, soc_min=0.1, soc_max=0.9)


@pytest.fixture
def state_half():
    return BatteryState(soc=0.5, vp=0.0)


@pytest.fixture
def window_10():
    return Window(steps=10, dt=1.0)

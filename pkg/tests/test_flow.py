import math

import numpy as np
import pytest

from halfmap import LienardParams, first_return, flow_at, oracle_half_map
from halfmap import kernels
from halfmap.errors import NoReturn, OutOfDomain
from halfmap.flow import (
    first_return_backward,
    flow_at_numeric,
    right_zone_backward,
    right_zone_forward,
    sample_orbit,
)

from oracles import frozen

ZONES = [(0, 1, 0), (2, 2, 0), (1, 1, 1), (-0.5, 2, -1), (3, 1, 1), (0.5, -1, 1), (1, 0, 2), (0, 0, 1)]


@pytest.mark.parametrize("params", ZONES)
def test_time_zero_is_identity(params):
    assert flow_at(LienardParams(*params), (0.3, -1.7), 0.0) == (0.3, -1.7)


def test_center_rotation():
    x, y = flow_at(LienardParams(0, 1, 0), (-1.0, 0.0), math.pi)
    assert x == pytest.approx(1.0, abs=1e-14)
    assert y == pytest.approx(0.0, abs=1e-14)
    assert flow_at_numeric(LienardParams(0, 1, 0), (-1.0, 0.0), math.pi) == pytest.approx((1.0, 0.0), abs=1e-10)


@pytest.mark.parametrize("params", ZONES)
def test_semigroup(params):
    p = LienardParams(*params)
    s = flow_at(p, (0.4, 0.9), 0.7)
    x, y = flow_at(p, s, 1.1)
    u, v = flow_at(p, (0.4, 0.9), 1.8)
    assert x == pytest.approx(u, rel=1e-12, abs=1e-12)
    assert y == pytest.approx(v, rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("params", ZONES)
@pytest.mark.parametrize("t", [0.05, 1.0, 3.0, -2.0])
def test_closed_form_matches_numeric_integration(params, t):
    p = LienardParams(*params)
    x, y = flow_at(p, (0.4, 0.9), t)
    u, v = flow_at_numeric(p, (0.4, 0.9), t)
    scale = 1.0 + abs(u) + abs(v)
    assert abs(x - u) <= 1e-10 * scale
    assert abs(y - v) <= 1e-10 * scale


@pytest.mark.parametrize("D,a", [(1e-7, 1.0), (0.0, 3.0), (1e-4, -2.0)])
def test_far_equilibrium_flow(D, a):
    p = LienardParams(1e-3, D, a)
    x, y = flow_at(p, (0.0, 1.0), 2.5)
    u, v = flow_at_numeric(p, (0.0, 1.0), 2.5)
    assert x == pytest.approx(u, rel=1e-11, abs=1e-13)
    assert y == pytest.approx(v, rel=1e-11, abs=1e-13)


def test_squared_steps_agree_with_closed_form():
    T, D, a = 0.3, 1.2, 0.8
    for t in (0.5, 4.0, -3.0):
        x, y = kernels._squared_steps(T, D, a, 0.2, 1.5, t, abs(T) + abs(D) + 1.0)
        u, v = flow_at_numeric(LienardParams(T, D, a), (0.2, 1.5), t)
        assert x == pytest.approx(u, rel=1e-12, abs=1e-12)
        assert y == pytest.approx(v, rel=1e-12, abs=1e-12)


def test_first_return_center():
    c = first_return(LienardParams(0, 1, 0), 1.0)
    assert c.exit_y == pytest.approx(-1.0, rel=1e-12)
    assert c.flight_time == pytest.approx(math.pi, rel=1e-12)
    assert not c.grazing


def test_first_return_focus():
    c = first_return(LienardParams(2, 2, 0), 1.0)
    assert c.exit_y == pytest.approx(-math.exp(math.pi), rel=1e-12)
    assert c.flight_time == pytest.approx(frozen.FLOW_TAU_T2_D2_A0_AT_1, rel=1e-12)
    c = first_return(LienardParams(1, 1, 1), 1.0)
    assert c.flight_time == pytest.approx(frozen.FLOW_TAU_T1_D1_A1_AT_1, rel=1e-10)
    assert c.exit_y == pytest.approx(frozen.P_T1_D1_A1_AT_1, rel=1e-10)


def test_oracle_half_map_examples():
    assert oracle_half_map(LienardParams(0, 1, 0), 1.0) == pytest.approx(-1.0, rel=1e-12)
    assert oracle_half_map(LienardParams(2, 2, 0), 1.0) == pytest.approx(-math.exp(math.pi), rel=1e-12)


def test_saddle_beyond_root_has_no_return():
    # W = -y^2 - 0.5 y + 1 has its positive root near 0.78
    p = LienardParams(0.5, -1, 1)
    assert oracle_half_map(p, 0.3) == pytest.approx(frozen.P_T05_DM1_A1_AT_03, rel=1e-10)
    with pytest.raises(NoReturn):
        first_return(p, 2.0)


def test_first_return_rejects_negative_start():
    with pytest.raises(OutOfDomain):
        first_return(LienardParams(1, 1, 1), -1.0)
    with pytest.raises(OutOfDomain):
        first_return_backward(LienardParams(1, 1, 1), 1.0)


def test_backward_inverts_forward():
    p = LienardParams(0.7, 1.3, 0.4)
    c = first_return(p, 2.0)
    b = first_return_backward(p, c.exit_y)
    assert b.exit_y == pytest.approx(2.0, rel=1e-10)
    assert b.flight_time == pytest.approx(c.flight_time, rel=1e-10)


def test_tangency_start_limit():
    p = LienardParams(1, 1, -1)
    c = first_return(p, 0.0)
    assert c.exit_y == pytest.approx(frozen.HAT_Y1_T1_D1_AM1, rel=1e-5)


def test_right_zone_passages():
    right = LienardParams(-0.4, 1.5, 0.6)
    b = 0.25
    c = right_zone_backward(right, b, 2.0)
    assert c.exit_y < b
    f = right_zone_forward(right, b, c.exit_y)
    assert f.exit_y == pytest.approx(2.0, rel=1e-10)
    with pytest.raises(OutOfDomain):
        right_zone_backward(right, b, 0.0)


def test_orbit_sample_stays_left():
    p = LienardParams(1, 1, 1)
    o = sample_orbit(p, 1.0, 100)
    assert o.states.shape == (100, 2)
    assert o.states[0] == pytest.approx((0.0, 1.0), abs=1e-14)
    assert np.all(o.states[1:-1, 0] < 0)
    assert o.states[-1, 1] == pytest.approx(frozen.P_T1_D1_A1_AT_1, rel=1e-10)


import math
import random
from fractions import Fraction

import numpy as np
import pytest

from halfmap import (
    Anchor,
    LienardParams,
    PowerSeries,
    domain_interval,
    eval_w,
    half_map,
    infinity_jet,
    puiseux_at_hat_y0,
    series_eval,
    series_invert,
    taylor_infinity,
    taylor_origin,
    taylor_origin_shifted,
)
from halfmap.errors import InvalidParams, NotInvertible, PreconditionViolated, WrongSide
from halfmap.series import (
    infinity_jet_recurrence,
    inverse_taylor_at_tangency,
    ode_residual,
    series_compose,
)


def test_origin_examples():
    s = taylor_origin(LienardParams(1, 1, 1), 3)
    assert s.coefficients == (Fraction(-1), Fraction(-2, 3), Fraction(-4, 9))
    assert s.is_exact
    assert s.exponents == (1, 2, 3)
    s = taylor_origin(LienardParams(1, 2, 1), 4)
    assert s.coefficient(4) == Fraction(-8, 135)
    s = taylor_origin(LienardParams(0, 3, 2), 8)
    assert s.coefficients == (-1,) + (0,) * 7


def test_origin_preconditions():
    with pytest.raises(PreconditionViolated, match="a != 0"):
        taylor_origin(LienardParams(1, 1, 0), 3)
    with pytest.raises(PreconditionViolated):
        taylor_origin(LienardParams(1, 1, -1), 3)
    with pytest.raises(InvalidParams):
        taylor_origin(LienardParams(1, 1, 1), 0)
    with pytest.raises(InvalidParams):
        taylor_origin(LienardParams(1, 1, 1), 21)


def test_float_params_use_extended_precision():
    s = taylor_origin(LienardParams(1.0, 1.0, 1.0), 3)
    assert not s.is_exact
    assert s.floats() == pytest.approx((-1.0, -2 / 3, -4 / 9), rel=1e-15)


@pytest.mark.parametrize("params", [(1, 1, 1), (-2, 3, 1), (Fraction(1, 2), -1, 3), (3, 0, 2)])
def test_origin_ode_residual_exact(params):
    T, D, a = (Fraction(v) for v in params)
    p = LienardParams(*params)
    n = 10
    s = taylor_origin(p, n)
    y1 = [Fraction(0)] + list(s.coefficients)
    res = ode_residual([Fraction(0), Fraction(1)], y1, T, D, a, n + 1)
    assert all(r == 0 for r in res)


@pytest.mark.parametrize("params", [(1, 1, 1), (-2, 3, 1), (Fraction(1, 3), -1, 2)])
def test_origin_jet_is_an_involution(params):
    s = taylor_origin(LienardParams(*params), 12)
    ss = series_compose(s, s)
    assert ss.coefficients[0] == 1
    assert all(c == 0 for c in ss.coefficients[1:])


def test_origin_jet_residual_near_zero():
    p = LienardParams(1.0, 1.0, 1.0)
    s = taylor_origin(p, 6)
    e1 = abs(series_eval(s, 1e-2) - half_map(p, 1e-2))
    e2 = abs(series_eval(s, 2e-2) - half_map(p, 2e-2))
    assert math.log2(e2 / e1) == pytest.approx(7.0, abs=0.2)


def test_shifted_examples():
    p = LienardParams(1, 1, -1)
    info = domain_interval(p)
    h = info.hat_y1
    s = taylor_origin_shifted(p, 6)
    assert s.anchor is Anchor.ORIGIN_SHIFTED
    assert s.coefficients[0] == pytest.approx(h, rel=1e-15)
    assert s.coefficients[1] == 0.0
    assert s.coefficients[2] == pytest.approx(eval_w(p, h) / (2 * h), rel=1e-13)
    assert s.coefficients[2] < 0
    assert abs(series_eval(s, 0.05) - half_map(p, 0.05)) <= 1e-9


def test_shifted_preconditions():
    for params in [(1, 1, 1), (-1, 1, -1), (1, 0, -1)]:
        with pytest.raises(PreconditionViolated):
            taylor_origin_shifted(LienardParams(*params), 4)


def test_shifted_ode_residual():
    p = LienardParams(1.5, 2.0, -0.7)
    s = taylor_origin_shifted(p, 10)
    res = ode_residual([0.0, 1.0], list(s.coefficients), 1.5, 2.0, -0.7, 10)
    scale = max(abs(c) for c in s.coefficients)
    assert max(abs(r) for r in res) <= 1e-12 * scale * scale


def test_puiseux_examples():
    p = LienardParams(-1, 1, -1)
    h = domain_interval(p).hat_y0
    s = puiseux_at_hat_y0(p, 6)
    assert s.exponents[:3] == (Fraction(1, 2), Fraction(1), Fraction(3, 2))
    w = eval_w(p, h)
    assert s.coefficients[0] == pytest.approx(-math.sqrt(2 * h / w), rel=1e-13)
    assert s.coefficients[1] == pytest.approx(-(2 * h / w) / 3, rel=1e-13)
    assert series_eval(s, h) == 0.0
    assert abs(series_eval(s, h + 0.01) - half_map(p, h + 0.01)) <= 1e-6
    with pytest.raises(WrongSide):
        series_eval(s, h - 0.01)


def test_puiseux_precondition():
    with pytest.raises(PreconditionViolated):
        puiseux_at_hat_y0(LienardParams(1, 1, -1), 4)


def test_derivative_blow_up_slope():
    p = LienardParams(-1, 1, -1)
    h = domain_interval(p).hat_y0

    def dp(e):
        k = 1e-3 * e
        return (half_map(p, h + e + k) - half_map(p, h + e - k)) / (2 * k)

    slope = math.log(abs(dp(4e-4)) / abs(dp(1e-4))) / math.log(4.0)
    assert slope == pytest.approx(-0.5, abs=0.05)


@pytest.mark.parametrize("params", [(-1, 1, -1), (-0.3, 2.0, -1.7), (-2.5, 2.0, -0.4)])
def test_inversion_of_tangency_jet_reproduces_puiseux(params):
    p = LienardParams(*params)
    inv = inverse_taylor_at_tangency(p, 13)
    assert inv.coefficients[1] == 0.0
    back = series_invert(inv)
    assert back.step == Fraction(1, 2)
    assert back.side == 1
    direct = puiseux_at_hat_y0(p, len(back.coefficients))
    scale = max(abs(c) for c in direct.coefficients)
    for x, y in zip(back.coefficients, direct.coefficients):
        assert abs(x - y) <= 1e-12 * scale


def test_series_invert_examples():
    ident = PowerSeries(Anchor.ORIGIN, 0.0, Fraction(1), Fraction(1), (Fraction(1), Fraction(0), Fraction(0)), 3)
    inv = series_invert(ident)
    assert inv.coefficients[0] == 1
    assert all(c == 0 for c in inv.coefficients[1:])
    sq = PowerSeries(Anchor.ORIGIN, 0.0, Fraction(1), Fraction(1), (Fraction(0), Fraction(1), Fraction(0)), 3)
    inv = series_invert(sq)
    assert inv.start == Fraction(1, 2)
    assert float(inv.coefficients[0]) == pytest.approx(-1.0)
    assert series_eval(inv, 4.0) == pytest.approx(-2.0)
    flat = PowerSeries(Anchor.ORIGIN, 0.0, Fraction(1), Fraction(1), (Fraction(0), Fraction(0), Fraction(1)), 3)
    with pytest.raises(NotInvertible):
        series_invert(flat)


def test_origin_inversion_is_the_jet_itself():
    s = taylor_origin(LienardParams(2, 3, 1), 8)
    inv = series_invert(s)
    assert inv.coefficients == s.coefficients


def test_infinity_jet_examples():
    j = infinity_jet(LienardParams(0, 1, 1))
    assert j.as_tuple() == (-1.0, 0.0, 0.0, 0.0)
    j = infinity_jet(LienardParams(2, 2, 0))
    assert j.alpha1 == pytest.approx(-math.exp(-math.pi), rel=1e-15)
    assert (j.alpha2, j.alpha3, j.alpha4) == (0.0, 0.0, 0.0)
    with pytest.raises(PreconditionViolated, match="4D-T"):
        infinity_jet(LienardParams(3, 1, 1))


@pytest.mark.parametrize("seed", range(6))
def test_infinity_closed_forms_match_recurrence(seed):
    rng = random.Random(seed)
    D = rng.uniform(0.3, 3.0)
    T = rng.uniform(-1.9, 1.9) * math.sqrt(D)
    a = rng.choice([-1, 1]) * rng.uniform(0.2, 3.0)
    p = LienardParams(T, D, a)
    closed = infinity_jet(p).as_tuple()
    rec = infinity_jet_recurrence(p, 4)
    for x, y in zip(closed, rec):
        assert abs(x - y) <= 1e-10 * max(1.0, max(abs(v) for v in closed))


def test_infinity_jet_by_polynomial_fit():
    p = LienardParams(0.4, 1.0, 0.8)
    j = infinity_jet(p)
    ys = np.linspace(2e-3, 4e-2, 16)
    q = [1.0 / (Y * half_map(p, 1.0 / Y)) for Y in ys]
    c = np.polynomial.polynomial.polyfit(ys, q, 4)
    # g(Y)/Y = alpha1 + alpha2 Y/2 + alpha3 Y^2/6 + ...
    assert c[0] == pytest.approx(j.alpha1, rel=1e-9)
    assert 2 * c[1] == pytest.approx(j.alpha2, rel=1e-6)
    assert 6 * c[2] == pytest.approx(j.alpha3, rel=1e-3)


def test_taylor_infinity_examples():
    s = taylor_infinity(LienardParams(0, 1, 1))
    assert s.coefficients == (-1.0, 0.0, 0.0, 0.0)
    assert s.exponents == (1, 0, -1, -2)
    s = taylor_infinity(LienardParams(2, 2, 0))
    assert s.coefficients[0] == pytest.approx(-math.exp(math.pi), rel=1e-15)
    assert s.coefficients[1:] == (0.0, 0.0, 0.0)
    assert series_eval(s, 1.0) == pytest.approx(-math.exp(math.pi), rel=1e-15)
    with pytest.raises(WrongSide):
        series_eval(s, -1.0)


def test_taylor_infinity_printed_terms():
    T, D, a = 0.7, 1.3, -0.9
    s = taylor_infinity(LienardParams(T, D, a))
    k = math.pi * T / math.sqrt(4 * D - T * T)
    assert s.coefficients[0] == pytest.approx(-math.exp(k), rel=1e-13)
    assert s.coefficients[1] == pytest.approx(a * T / D * (1 + math.exp(k)), rel=1e-13)
    assert s.coefficients[2] == pytest.approx(-(a * a / D) * math.sinh(k), rel=1e-12)


def test_taylor_infinity_residual_scaling():
    p = LienardParams(1, 1, 1)
    s = taylor_infinity(p, 4)
    r1 = abs(half_map(p, 100.0) - series_eval(s, 100.0))
    r2 = abs(half_map(p, 1000.0) - series_eval(s, 1000.0))
    assert 10 ** 2.5 <= r1 / r2 <= 10 ** 3.5


def test_series_eval_examples():
    s = taylor_origin(LienardParams(0, 1, 2), 5)
    assert series_eval(s, 5.0) == -5.0


def test_exact_arithmetic_for_fraction_params():
    p = LienardParams(Fraction(1, 3), Fraction(5, 2), Fraction(-7, 4) * -1)
    s = taylor_origin(p, 6)
    assert s.is_exact
    T, D, a = Fraction(1, 3), Fraction(5, 2), Fraction(7, 4)
    assert s.coefficient(2) == -2 * T / (3 * a)
    assert s.coefficient(4) == 2 * (9 * D * T - 22 * T ** 3) / (135 * a ** 3)

"""Half-maps by integrating the linear flow: an independent oracle.

The flow of x' = T x - y, y' = D x - a is evaluated in closed form and the
first return to x = 0 is located by sampling x(t) and refining with Brent's
method. Nothing here uses the integral characterization.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from . import kernels
from .core import LienardParams
from .errors import NoReturn, OutOfDomain

__all__ = [
    "FlowCrossing",
    "OrbitSample",
    "flow_at",
    "flow_at_numeric",
    "zone_first_return",
    "first_return",
    "oracle_half_map",
    "right_zone_backward",
    "right_zone_forward",
    "sample_orbit",
]

GRAZE_TOL = 1e-10
LIMIT_OFFSETS = (1e-6, 1e-8)


@dataclass(frozen=True)
class FlowCrossing:
    flight_time: float
    exit_y: float
    grazing: bool


@dataclass(frozen=True)
class OrbitSample:
    times: np.ndarray
    states: np.ndarray     # shape (n, 2)


def flow_at(params: LienardParams, state, t: float) -> tuple[float, float]:
    T, D, a = params.floats()
    x0, y0 = state
    return kernels.flow_state(T, D, a, float(x0), float(y0), float(t))


def flow_at_numeric(params: LienardParams, state, t: float, rtol=1e-13, atol=1e-13) -> tuple[float, float]:
    """Same as ``flow_at`` but by DOP853 stepping; only used to check the closed form."""
    T, D, a = params.floats()
    if t == 0:
        return float(state[0]), float(state[1])
    sol = solve_ivp(lambda _, u: (T * u[0] - u[1], D * u[0] - a), (0.0, float(t)),
                    [float(state[0]), float(state[1])], method="DOP853", rtol=rtol, atol=atol)
    return float(sol.y[0, -1]), float(sol.y[1, -1])


def _budgets(params: LienardParams, s0: float):
    T, D, a = params.floats()
    disc = 4.0 * D - T * T
    if disc > 0.0:
        omega = 0.5 * math.sqrt(disc)
        # h' = side * (T x - y) is a damped sinusoid: one zero per half period
        return 10.0 * 2.0 * math.pi / math.sqrt(disc), math.pi / (4.0 * omega), math.inf
    # real spectrum: h' has at most one zero, so any step is safe
    lam = [abs(0.5 * (T + s * math.sqrt(-disc))) for s in (1.0, -1.0)]
    lam = [v for v in lam if v > 0.0]
    scale = max(1.0, abs(s0), abs(a) / max(math.sqrt(abs(D)), abs(T), 1e-300) if a != 0.0 else 1.0)
    t_budget = 200.0 / min(lam) if lam else 0.0
    if a != 0.0:
        t_budget += 20.0 * (1.0 + abs(s0)) / abs(a)
    t_budget = max(t_budget, 1e3)
    return t_budget, math.inf, 1e6 * scale


def zone_first_return(params: LienardParams, s0: float, side: int, direction: int) -> FlowCrossing:
    """First return to x = 0 of the orbit through (0, s0) inside ``side * x > 0``.

    ``direction`` is +1 for forward and -1 for backward time.
    """
    T, D, a = params.floats()
    t_budget, dt_max, arc_budget = _budgets(params, s0)
    tau, exit_y, status, grazing = kernels.zone_return(
        T, D, a, float(s0), float(side), float(direction), t_budget, dt_max, arc_budget, GRAZE_TOL
    )
    if status == kernels.TANGENT_START:
        raise OutOfDomain(f"the orbit through (0, {s0!r}) does not enter the zone side*x>0 (side={side})")
    if status != kernels.OK:
        raise NoReturn(f"no return to the section from (0, {s0!r}) within the budget (status {status}) for {params}")
    return FlowCrossing(tau, exit_y, bool(grazing or abs(exit_y) <= GRAZE_TOL))


def _limit_at_zero(fn) -> FlowCrossing:
    e1, e2 = LIMIT_OFFSETS
    c1 = fn(e1)
    c2 = fn(e2)
    w = e2 / (e1 - e2)
    y = c2.exit_y - (c1.exit_y - c2.exit_y) * w
    t = c2.flight_time - (c1.flight_time - c2.flight_time) * w
    # extrapolation noise must not flip the sign conventions
    y = min(y, 0.0)
    return FlowCrossing(max(t, 0.0), y, abs(y) <= GRAZE_TOL)


def first_return(params: LienardParams, y0: float) -> FlowCrossing:
    """Left half-map by the flow: forward in time through x < 0."""
    y0 = float(y0)
    if not y0 >= 0.0:
        raise OutOfDomain(f"left half-map requires y0>=0, got {y0!r}")
    if y0 == 0.0:
        return _limit_at_zero(lambda e: zone_first_return(params, e, -1, 1))
    return zone_first_return(params, y0, -1, 1)


def first_return_backward(params: LienardParams, y1: float) -> FlowCrossing:
    """Inverse left half-map by the flow: backward in time from (0, y1), y1 < 0."""
    y1 = float(y1)
    if not y1 < 0.0:
        raise OutOfDomain(f"backward left passage requires y1<0, got {y1!r}")
    return zone_first_return(params, y1, -1, -1)


def oracle_half_map(params: LienardParams, y0: float) -> float:
    return first_return(params, y0).exit_y


def right_zone_backward(right: LienardParams, b: float, y0: float) -> FlowCrossing:
    """Backward half-map of the zone x > 0 with x' = T x - y + b, y' = D x - a.

    Integrates the right system itself (in y - b coordinates), never the
    reflected left system. ``exit_y`` is in the original coordinate.
    """
    s0 = float(y0) - float(b)
    if not s0 >= 0.0:
        raise OutOfDomain(f"backward half-map requires y0>=b, got y0={y0!r}, b={b!r}")
    if s0 == 0.0:
        c = _limit_at_zero(lambda e: zone_first_return(right, e, 1, -1))
    else:
        c = zone_first_return(right, s0, 1, -1)
    return FlowCrossing(c.flight_time, c.exit_y + b, c.grazing)


def right_zone_forward(right: LienardParams, b: float, y1: float) -> FlowCrossing:
    """Forward passage through x > 0 from (0, y1) with y1 <= b."""
    s0 = float(y1) - float(b)
    if not s0 <= 0.0:
        raise OutOfDomain(f"forward right passage requires y1<=b, got y1={y1!r}, b={b!r}")
    c = zone_first_return(right, s0, 1, 1)
    return FlowCrossing(c.flight_time, c.exit_y + b, c.grazing)


def sample_orbit(params: LienardParams, y0: float, n: int = 200) -> OrbitSample:
    """Dense samples of the left passage from (0, y0) to its first return."""
    c = first_return(params, y0)
    T, D, a = params.floats()
    times = np.linspace(0.0, c.flight_time, int(n))
    return OrbitSample(times, kernels.flow_states(T, D, a, 0.0, float(y0), times))

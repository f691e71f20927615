"""Poincare half-maps of planar linear systems, computed from an integral
characterization, with series jets, a flow-based oracle and a crossing-orbit
search for two-zone piecewise linear systems."""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    DomainInfo,
    Endpoint,
    EndpointKind,
    LienardParams,
    PvConstant,
    QuadraticW,
    antiderivative_h,
    bisector_position,
    c_constant,
    derivative1,
    derivative2,
    domain_interval,
    eval_w,
    half_map,
    half_map_inverse,
    involution,
    integral_value,
    quadratic_w,
)
from .errors import *  # noqa: E402,F401,F403
from .flow import FlowCrossing, OrbitSample, first_return, flow_at, oracle_half_map  # noqa: E402
from .pwl import (  # noqa: E402
    CrossingOrbit,
    CrossingOrbitReport,
    PwlSystem,
    SearchConfig,
    SlidingSegment,
    backward_map,
    corollary_certificates,
    displacement,
    find_crossing_orbits,
    forward_map,
)
from .series import (  # noqa: E402
    Anchor,
    InfinityInversionJet,
    PowerSeries,
    infinity_jet,
    puiseux_at_hat_y0,
    series_eval,
    series_invert,
    taylor_infinity,
    taylor_origin,
    taylor_origin_shifted,
)
